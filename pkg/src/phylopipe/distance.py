"""Distance metrics over allelic profiles and matrix construction.

Each metric has a vectorized form, ``metric(a, B)``, giving the distances
from one encoded profile ``a`` to every row of ``B``. Scalar helpers route
through the same code so lazy and eager matrices agree cell for cell.
"""

from __future__ import annotations

import numpy as np

from .dataset import NUCLEOTIDE, Dataset, Profile
from .errors import DataError, DomainError
from .matrix import DistanceMatrix

SYMMETRIC = {"hamming": True, "grapetree": False, "kimura": True}


def hamming_many(a: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Number of loci at which ``a`` differs from each row of ``others``."""
    return np.count_nonzero(others != a, axis=1).astype(float)


def grapetree_many(a: np.ndarray, others: np.ndarray, missing=0) -> np.ndarray:
    """Asymmetric distances from ``a`` to each row, ignoring loci missing in the row."""
    present = others != missing
    differ = np.count_nonzero((others != a) & present, axis=1)
    compared = np.count_nonzero(present, axis=1)
    if (compared == 0).any():
        raise DomainError("target profile has only missing loci")
    return differ / compared


_NUCLEOTIDES = {"A": 0, "G": 1, "C": 2, "T": 3}


def _nucleotide_row(loci) -> list[int]:
    return [_NUCLEOTIDES.get(c.upper(), -1) for c in loci]


def nucleotide_codes(dataset: Dataset) -> np.ndarray:
    """Encode sequences as A=0, G=1, C=2, T=3 and -1 for gaps or ambiguity codes.

    Purines and pyrimidines share ``code // 2``, so a transition is a
    difference that keeps it.
    """
    return np.array([_nucleotide_row(p.loci) for p in dataset.profiles], dtype=np.int8)


def pair_counts(a: np.ndarray, others: np.ndarray):
    """Transition, transversion and compared-site counts from ``a`` to each row."""
    valid = (others >= 0) & (a >= 0)
    differ = (others != a) & valid
    same_class = (others // 2) == (a // 2)
    transitions = np.count_nonzero(differ & same_class, axis=1)
    transversions = np.count_nonzero(differ & ~same_class, axis=1)
    compared = np.count_nonzero(valid, axis=1)
    return transitions, transversions, compared


def kimura_formula(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    first = 1 - 2 * p - q
    second = 1 - 2 * q
    if (first <= 0).any() or (second <= 0).any():
        raise DomainError("Kimura distance undefined: 1 - 2P - Q and 1 - 2Q must be positive")
    return -0.5 * np.log(first * np.sqrt(second))


def kimura_many(a: np.ndarray, others: np.ndarray) -> np.ndarray:
    transitions, transversions, compared = pair_counts(a, others)
    if (compared == 0).any():
        raise DomainError("no comparable nucleotide positions")
    return kimura_formula(transitions / compared, transversions / compared)


def _encode_pair(a: Profile, b: Profile, missing: str):
    if len(a.loci) != len(b.loci):
        raise DataError(f"profiles {a.id!r} and {b.id!r} have different lengths")
    table = {missing: 0}
    enc = [[table.setdefault(t, len(table)) for t in p.loci] for p in (a, b)]
    return np.array(enc[0]), np.array([enc[1]])


def hamming(a: Profile, b: Profile) -> float:
    x, others = _encode_pair(a, b, "\0")
    return float(hamming_many(x, others)[0])


def grapetree_distance(i: Profile, j: Profile, missing: str = "0") -> float:
    """Distance from ``i`` to ``j`` over the loci where ``j`` is not missing."""
    x, others = _encode_pair(i, j, missing)
    return float(grapetree_many(x, others)[0])


def kimura_distance(a: Profile, b: Profile) -> float:
    if len(a.loci) != len(b.loci):
        raise DataError(f"profiles {a.id!r} and {b.id!r} have different lengths")
    x = np.array(_nucleotide_row(a.loci), dtype=np.int8)
    y = np.array([_nucleotide_row(b.loci)], dtype=np.int8)
    return float(kimura_many(x, y)[0])


def _row_function(dataset: Dataset, metric: str):
    if metric == "hamming":
        codes = dataset.codes
        return lambda i, js: hamming_many(codes[i], codes[js])
    if metric == "grapetree":
        codes = dataset.codes
        return lambda i, js: grapetree_many(codes[i], codes[js])
    if metric == "kimura":
        if dataset.kind != NUCLEOTIDE:
            raise DataError(f"Kimura distance needs nucleotide sequences, got a {dataset.kind} dataset")
        codes = nucleotide_codes(dataset)
        return lambda i, js: kimura_many(codes[i], codes[js])
    raise ValueError(f"unknown metric {metric!r}")


def build_matrix(dataset: Dataset, metric: str = "hamming", mode: str = "eager") -> DistanceMatrix:
    """Distance matrix of ``dataset`` under ``metric``.

    ``mode="lazy"`` defers every cell until it is requested; ``"eager"``
    computes all of them up front.
    """
    if mode not in ("eager", "lazy"):
        raise ValueError(f"unknown mode {mode!r}")
    compute = _row_function(dataset, metric)
    symmetric = SYMMETRIC[metric]
    if mode == "lazy":
        return DistanceMatrix.lazy(dataset.ids, compute, symmetric=symmetric, metric=metric)
    n = len(dataset)
    if symmetric:
        store = np.concatenate([compute(i, np.arange(i)) for i in range(n)]) if n > 1 else np.zeros(0)
    else:
        store = np.zeros((n, n))
        for i in range(n):
            others = np.delete(np.arange(n), i)
            store[i, others] = compute(i, others)
    return DistanceMatrix(dataset.ids, symmetric, store, metric=metric)


METRICS = tuple(SYMMETRIC)
