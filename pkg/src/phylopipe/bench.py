"""Timing harness for the tree algorithms on synthetic allelic profiles."""

from __future__ import annotations

import csv
import math
import time
import tracemalloc
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TextIO

import numpy as np

from .dataset import CATEGORICAL, Dataset, Profile
from .distance import build_matrix
from .gcp import VARIANTS as GCP_VARIANTS, run_gcp
from .matrix import DistanceMatrix
from .mst import run_edmonds, run_goeburst
from .nj import VARIANTS as NJ_VARIANTS, run_nj
from .tree import Tree

Algorithm = Callable[[DistanceMatrix, Dataset], Tree]


def _gcp(variant: str) -> Algorithm:
    return lambda matrix, dataset: run_gcp(matrix, variant)


def _nj(variant: str) -> Algorithm:
    return lambda matrix, dataset: run_nj(matrix, variant)


ALGORITHMS: dict[str, Algorithm] = {
    "goeburst": lambda matrix, dataset: run_goeburst(matrix, 3, dataset),
    "goeburstfull": lambda matrix, dataset: run_goeburst(matrix, dataset.locus_count, dataset),
    "edmonds": lambda matrix, dataset: run_edmonds(matrix),
    **{name: _gcp(name) for name in GCP_VARIANTS},
    **{name: _nj(name) for name in NJ_VARIANTS},
}

# timings at or below this are dominated by noise and left out of fits
NOISE_FLOOR_MS = 5.0


@dataclass
class BenchConfig:
    """What to time and how.

    ``loci`` and ``alphabet`` shape the synthetic profiles: each locus
    draws uniformly from ``alphabet`` alleles.
    """

    algorithm: str
    sizes: Sequence[int]
    warmups: int = 10
    iterations: int = 20
    mode: str = "eager"
    seed: int = 0
    loci: int = 20
    alphabet: int = 10
    memory: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.mode not in ("eager", "lazy"):
            raise ValueError(f"mode must be 'eager' or 'lazy', got {self.mode!r}")
        if self.warmups < 0 or self.iterations < 1:
            raise ValueError("warmups must be >= 0 and iterations >= 1")
        if not self.sizes or min(self.sizes) < 2:
            raise ValueError("sizes must be a non-empty list of counts >= 2")


@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    n: int
    mode: str
    time_ms: float
    mem_mb: Optional[float] = field(default=None)


def synthetic_dataset(n: int, loci: int = 20, alphabet: int = 10, seed: int = 0) -> Dataset:
    """``n`` random profiles; the same arguments always give the same data."""
    rng = np.random.default_rng([seed, n, loci, alphabet])
    alleles = rng.integers(1, alphabet + 1, size=(n, loci))
    profiles = tuple(
        Profile(f"P{i + 1}", tuple(str(a) for a in row)) for i, row in enumerate(alleles.tolist())
    )
    return Dataset(profiles, CATEGORICAL)


def _job(config: BenchConfig, dataset: Dataset) -> Callable[[], Tree]:
    algorithm = ALGORITHMS[config.algorithm]
    if config.mode == "eager":
        matrix = build_matrix(dataset, "hamming", "eager")
        return lambda: algorithm(matrix, dataset)
    return lambda: algorithm(build_matrix(dataset, "hamming", "lazy"), dataset)


def _peak_mb(job: Callable[[], Tree]) -> Optional[float]:
    if tracemalloc.is_tracing():
        return None
    tracemalloc.start()
    try:
        job()
        return tracemalloc.get_traced_memory()[1] / 2**20
    finally:
        tracemalloc.stop()


def run_bench(config: BenchConfig) -> list[BenchRecord]:
    """Mean wall-clock time per size after the warmup runs.

    In eager mode the distance matrix is computed before timing starts; in
    lazy mode building the lazy matrix and every distance it serves are
    part of the timed run. Peak memory comes from a separate traced run.
    """
    records = []
    for n in config.sizes:
        dataset = synthetic_dataset(n, config.loci, config.alphabet, config.seed)
        job = _job(config, dataset)
        for _ in range(config.warmups):
            job()
        elapsed = []
        for _ in range(config.iterations):
            start = time.perf_counter()
            job()
            elapsed.append(time.perf_counter() - start)
        memory = _peak_mb(job) if config.memory else None
        records.append(BenchRecord(config.algorithm, n, config.mode, 1000 * sum(elapsed) / len(elapsed), memory))
    return records


def fit_exponent(records: Sequence[BenchRecord]) -> float:
    """Least-squares slope of log(time) against log(n).

    Needs at least three distinct sizes; points at or under the noise
    floor are dropped, and at least two sizes must remain.
    """
    if len({r.n for r in records}) < 3:
        raise ValueError("fitting an exponent needs at least three distinct sizes")
    kept = [r for r in records if r.time_ms > NOISE_FLOOR_MS]
    if len({r.n for r in kept}) < 2:
        raise ValueError(f"fewer than two sizes ran longer than {NOISE_FLOOR_MS} ms")
    x = np.log([r.n for r in kept])
    y = np.log([r.time_ms for r in kept])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def write_csv(records: Sequence[BenchRecord], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["algorithm", "n", "mode", "time_ms", "mem_mb"])
    for r in records:
        mem = "" if r.mem_mb is None or math.isnan(r.mem_mb) else f"{r.mem_mb:.3f}"
        writer.writerow([r.algorithm, r.n, r.mode, f"{r.time_ms:.3f}", mem])
