"""Acceptance criteria, one test per criterion.

Each test checks its own wall-clock budget; the terminal summary prints
one PASS/FAIL line per criterion.
"""

import random
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from oracles import (harmonic_root, isomorphic, min_arborescence_weight, min_spanning_weight, naive_gcp,
                     random_additive_tree, random_spanning_tree, splits_of_adjacency, splits_of_tree)
from phylopipe.bench import ALGORITHMS, BenchConfig, fit_exponent, run_bench
from phylopipe.cli import main
from phylopipe.correction import jukes_cantor_value
from phylopipe.dataset import CATEGORICAL, Dataset, Profile, read_fasta, read_ml, read_snp
from phylopipe.distance import build_matrix, kimura_formula
from phylopipe.errors import DomainError
from phylopipe.gcp import VARIANTS as GCP_VARIANTS, run_gcp
from phylopipe.lbr import run_lbr
from phylopipe.matrix import DistanceMatrix, read_matrix
from phylopipe.mst import run_edmonds, run_goeburst
from phylopipe.nj import run_nj
from phylopipe.tree import Edge, Tree, read_newick, read_nexus, write_newick

MLST_HAMMING = [[0, 2, 2], [2, 0, 1], [2, 1, 0]]

# recomputed with mpmath at 50 digits (see test_distance.py)
JC_HALF = 0.8239592165010822685
KIMURA_P01_Q005 = 0.1701811651403470390

QUADRATIC = ["goeburst", "goeburstfull", "edmonds", *GCP_VARIANTS]
CUBIC = ["studierkeppler", "saitounei", "unj"]


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f} s, limit {self.seconds} s"


def named(a, symmetric=None):
    return DistanceMatrix.from_array([str(k + 1) for k in range(len(a))], a, symmetric=symmetric)


def tree_weight(tree, d):
    return sum(d[e.parent][e.child] for e in tree.edges)


def rooted_spanning_tree(n, pairs, root):
    adjacent = {v: [] for v in range(n)}
    for a, b in pairs:
        adjacent[a].append(b)
        adjacent[b].append(a)
    edges, seen, stack = [], {root}, [root]
    while stack:
        v = stack.pop()
        for w in adjacent[v]:
            if w not in seen:
                seen.add(w)
                edges.append(Edge(v, w, 0.0))
                stack.append(w)
    return Tree({k: str(k + 1) for k in range(n)}, edges)


@pytest.mark.acceptance(1, "Hamming matrix of the three MLST profiles")
def test_criterion_1_mlst_hamming(data_dir):
    with Budget(1):
        ds = read_ml((data_dir / "mlst_three_profiles.tsv").read_text())
        for mode in ("eager", "lazy"):
            assert build_matrix(ds, "hamming", mode).dense().tolist() == MLST_HAMMING


@pytest.mark.acceptance(2, "golden dataset, matrix and tree files")
def test_criterion_2_golden_files(data_dir):
    with Budget(1):
        fasta = read_fasta((data_dir / "two_sequences.fasta").read_text())
        assert (len(fasta), fasta.locus_count) == (2, 120)
        snp = read_snp((data_dir / "two_sequences.snp").read_text())
        assert (len(snp), snp.locus_count) == (2, 58)
        mlst = read_ml((data_dir / "mlst_three_profiles.tsv").read_text())
        assert (len(mlst), mlst.locus_count) == (3, 2)
        mlva = read_ml((data_dir / "mlva_three_profiles.tsv").read_text())
        assert (len(mlva), mlva.locus_count, mlva.ids) == (3, 2, ["15", "32", "34"])

        square = read_matrix((data_dir / "mlst_hamming_square.txt").read_text(), symmetric=False)
        triangle = read_matrix((data_dir / "mlst_hamming_triangle.txt").read_text(), symmetric=True)
        assert square.dense().tolist() == MLST_HAMMING
        assert triangle.dense().tolist() == MLST_HAMMING

        tree = read_newick((data_dir / "rooted_five_taxa.nwk").read_text())
        assert isomorphic(read_newick(write_newick(tree)), tree)
        assert isomorphic(read_nexus((data_dir / "rooted_five_taxa.nex").read_text()), tree)


@pytest.mark.acceptance(3, "GCP variants against a naive reference")
def test_criterion_3_gcp_oracle():
    rng = random.Random(20240301)
    with Budget(60):
        for _ in range(1000):
            n = rng.randint(2, 8)
            a = np.zeros((n, n))
            a[np.triu_indices(n, 1)] = rng.sample(range(1, 10 * n * n), n * (n - 1) // 2)
            a = a + a.T
            m = named(a, symmetric=True)
            for variant in GCP_VARIANTS:
                got = {(e.parent, e.child, round(e.length, 9)) for e in run_gcp(m, variant).edges}
                want = {(p, c, round(x, 9)) for p, c, x in naive_gcp(a.tolist(), variant)}
                assert got == want, (variant, a.tolist())


@pytest.mark.acceptance(4, "goeBURST and Edmonds against exhaustive minima")
def test_criterion_4_mst_oracle():
    rng = random.Random(20240302)
    with Budget(120):
        for _ in range(200):
            n = rng.randint(2, 7)
            a = np.zeros((n, n))
            a[np.triu_indices(n, 1)] = [rng.randint(1, 6) for _ in range(n * (n - 1) // 2)]
            a = a + a.T
            t = run_goeburst(named(a, symmetric=True))
            assert len(t.edges) == n - 1 and t.nodes == set(range(n))
            assert tree_weight(t, a) == min_spanning_weight(a.tolist()), a.tolist()
        for _ in range(200):
            n = rng.randint(2, 5)
            a = np.array([[rng.randint(1, 6) for _ in range(n)] for _ in range(n)], dtype=float)
            np.fill_diagonal(a, 0)
            t = run_edmonds(named(a, symmetric=False))
            root = harmonic_root(a.tolist())
            assert t.root == root
            assert tree_weight(t, a) == pytest.approx(min_arborescence_weight(a.tolist(), root)), a.tolist()


@pytest.mark.acceptance(5, "NJ recovers additive trees")
def test_criterion_5_nj_additive():
    rng = random.Random(20240303)
    with Budget(60):
        for _ in range(200):
            n = rng.randint(3, 12)
            adj, dist = random_additive_tree(n, rng)
            truth = splits_of_adjacency(adj, n)
            m = DistanceMatrix.from_array([f"s{k}" for k in range(n)], dist, symmetric=True)
            for variant in ("studierkeppler", "saitounei", "unj"):
                got = splits_of_tree(run_nj(m, variant), n)
                assert set(got) == set(truth), variant
                if variant != "unj":
                    assert max(abs(got[s] - w) for s, w in truth.items()) < 1e-9, variant


@pytest.mark.acceptance(6, "fitted time-complexity exponents")
def test_criterion_6_exponents():
    exponents = {}
    with Budget(15 * 60):
        for name in QUADRATIC + CUBIC:
            records = run_bench(BenchConfig(name, [200, 400, 800], warmups=10, iterations=20, memory=False))
            exponents[name] = fit_exponent(records)
    print(" ".join(f"{k}={v:.2f}" for k, v in exponents.items()))
    for name in QUADRATIC:
        assert 1.6 <= exponents[name] <= 2.6, (name, exponents[name])
    for name in CUBIC:
        assert 2.5 <= exponents[name] <= 3.5, (name, exponents[name])


def random_dataset(rng):
    n = rng.randint(2, 25)
    loci = rng.randint(1, 12)
    alphabet = rng.randint(2, 4)
    profiles = [Profile(f"p{k}", tuple(str(rng.randint(1, alphabet)) for _ in range(loci))) for k in range(n)]
    return Dataset(tuple(profiles), CATEGORICAL)


@pytest.mark.acceptance(7, "lazy and eager matrices give identical trees")
def test_criterion_7_lazy_eager():
    rng = random.Random(20240304)
    with Budget(60):
        for _ in range(50):
            ds = random_dataset(rng)
            for name, algorithm in ALGORITHMS.items():
                texts = []
                for mode in ("eager", "lazy"):
                    m = build_matrix(ds, "hamming", mode)
                    tree = algorithm(m, ds)
                    texts.append(write_newick(tree))
                    if name in ("goeburst", "goeburstfull", "edmonds"):
                        texts.append(write_newick(run_lbr(tree, m)))
                assert texts[: len(texts) // 2] == texts[len(texts) // 2:], name
            grape = [write_newick(run_edmonds(build_matrix(ds, "grapetree", mode))) for mode in ("eager", "lazy")]
            assert grape[0] == grape[1]


@pytest.mark.acceptance(8, "LBR never increases weight and keeps MSTs")
def test_criterion_8_lbr():
    rng = random.Random(20240305)
    with Budget(60):
        for k in range(100):
            n = rng.randint(2, 12)
            a = np.array([[rng.randint(1, 9) for _ in range(n)] for _ in range(n)], dtype=float)
            if k % 2 == 0:
                a = np.triu(a, 1) + np.triu(a, 1).T
            np.fill_diagonal(a, 0)
            m = named(a)
            tree = rooted_spanning_tree(n, random_spanning_tree(n, rng), rng.randrange(n))
            out = run_lbr(tree, m)
            assert out.nodes == set(range(n)) and len(out.edges) == n - 1
            assert len({e.child for e in out.edges} | {out.root}) == n
            assert tree_weight(out, a) <= tree_weight(tree, a) + 1e-12
        for _ in range(100):
            n = rng.randint(2, 7)
            a = np.zeros((n, n))
            a[np.triu_indices(n, 1)] = [rng.randint(1, 5) for _ in range(n * (n - 1) // 2)]
            a = a + a.T
            m = named(a, symmetric=True)
            mst = run_goeburst(m)
            best = min_spanning_weight(a.tolist())
            assert tree_weight(mst, a) == best
            assert tree_weight(run_lbr(mst, m), a) == best


@pytest.mark.acceptance(9, "Jukes-Cantor and Kimura spot values")
def test_criterion_9_spot_values():
    with Budget(1):
        assert float(jukes_cantor_value(0.0)) == 0.0
        assert abs(float(jukes_cantor_value(0.5)) - JC_HALF) < 1e-6
        with pytest.raises(DomainError):
            jukes_cantor_value(0.75)
        assert abs(float(kimura_formula(0.1, 0.05)) - KIMURA_P01_Q005) < 1e-6


USER_ERRORS = {
    "NoCommand": [],
    "InvalidCommand": ["cluster", "upgma"],
    "MissingType": ["distance", "--dataset=snp:dataset.txt"],
    "InvalidType": ["algorithm", "bionj"],
    "RepeatedCommand": ["distance", "hamming", ":", "distance", "kimura"],
    "MissingInput": ["algorithm", "upgma"],
}


@pytest.mark.acceptance(10, "command line example and user errors")
def test_criterion_10_cli(data_dir, tmp_path, monkeypatch, caplog):
    shutil.copy(data_dir / "isolates_snp.txt", tmp_path / "dataset.txt")
    monkeypatch.chdir(tmp_path)
    argv = ["algorithm", "goeburst", "--lvs=3", "--out=newick:tree.txt", ":", "distance", "hamming",
            "--dataset=snp:dataset.txt", ":", "optimization", "lbr", "--out=newick:out.txt"]
    with Budget(5):
        proc = subprocess.run([sys.executable, "-m", "phylopipe", *argv], capture_output=True, text=True,
                              timeout=5)
        assert proc.returncode == 0, proc.stderr
        for name in ("tree.txt", "out.txt"):
            tree = read_newick((tmp_path / name).read_text())
            assert set(tree.names.values()) == {str(k) for k in range(1, 13)}
            assert len(tree.edges) == 11
        for kind, args in USER_ERRORS.items():
            caplog.clear()
            assert main(args) == 1, kind
            assert kind in caplog.text, kind
