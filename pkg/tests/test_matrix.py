import numpy as np
import pytest
from hypothesis import given, strategies as st

from phylopipe.dataset import read_ml
from phylopipe.distance import build_matrix
from phylopipe.errors import DataError, ParseError
from phylopipe.matrix import DistanceMatrix, format_number, read_matrix, write_matrix

MLST_HAMMING = [[0, 2, 2], [2, 0, 1], [2, 1, 0]]


def test_square_golden(data_dir):
    m = read_matrix((data_dir / "mlst_hamming_square.txt").read_text(), symmetric=False)
    assert m.ids == ["1", "2", "3"]
    assert m.dense().tolist() == MLST_HAMMING
    assert m.get(0, 1) == 2
    assert m.has_symmetric_values()


def test_triangle_golden(data_dir):
    m = read_matrix((data_dir / "mlst_hamming_triangle.txt").read_text(), symmetric=True)
    assert m.dense().tolist() == MLST_HAMMING
    assert m.storage_size == 3


def test_write_matches_golden_files(data_dir):
    m = DistanceMatrix.from_array(["1", "2", "3"], MLST_HAMMING)
    assert write_matrix(m, True) == (data_dir / "mlst_hamming_triangle.txt").read_text()
    assert write_matrix(m, False) == (data_dir / "mlst_hamming_square.txt").read_text()


def test_single_profile():
    m = read_matrix("1\nA", symmetric=True)
    assert m.dense().tolist() == [[0.0]]
    assert m.get(0, 0) == 0


@pytest.mark.parametrize("text,sym", [
    ("3\n1\n2 2", True),
    ("2\n1\n2 2 3", True),
    ("2\n1 0 x\n2 1 0", False),
    ("2\n1 0 1\n2 1", False),
    ("2\n1 1 1\n2 1 0", False),
    ("x\n1", True),
    ("", True),
])
def test_read_errors(text, sym):
    with pytest.raises(ParseError):
        read_matrix(text, sym)


def test_asymmetric_written_as_symmetric_fails():
    m = DistanceMatrix.from_array(["a", "b"], [[0, 0.5], [1, 0]])
    assert not m.symmetric
    with pytest.raises(DataError):
        write_matrix(m, True)


def test_lazy_cache_counts_evaluations():
    ds = read_ml("ST a b\n1 1 1\n2 2 2\n3 3 2")
    m = build_matrix(ds, "hamming", "lazy")
    assert m.evaluations == 0
    assert m.get(1, 2) == 1
    assert m.evaluations == 1
    assert m.get(2, 1) == 1
    assert m.evaluations == 1
    m.dense()
    assert m.evaluations == 3
    m.dense()
    assert m.evaluations == 3


def test_diagonal_is_zero():
    m = DistanceMatrix.from_array(list("abc"), [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    assert all(m.get(k, k) == 0 for k in range(3))
    with pytest.raises(IndexError):
        m.get(0, 3)


def test_format_number():
    assert format_number(2.0) == "2"
    assert format_number(0.1) == "0.1"
    assert format_number(1 / 3) == repr(1 / 3)


_short = st.integers(0, 10**5).map(lambda k: k / 100)


@given(st.integers(1, 7).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(_short, min_size=n * n, max_size=n * n))))
def test_round_trip(case):
    n, values = case
    a = np.array(values).reshape(n, n)
    np.fill_diagonal(a, 0)
    ids = [f"p{k}" for k in range(n)]
    square = DistanceMatrix.from_array(ids, a, symmetric=False)
    back = read_matrix(write_matrix(square, False), False)
    assert back.ids == ids and np.array_equal(back.dense(), a)
    sym = np.tril(a) + np.tril(a).T
    tri = DistanceMatrix.from_array(ids, sym, symmetric=True)
    back = read_matrix(write_matrix(tri, True), True)
    assert np.array_equal(back.dense(), sym)
    assert tri.storage_size == n * (n - 1) // 2


def test_ids_with_spaces_round_trip():
    m = DistanceMatrix.from_array(["Sequence 1", "'odd", "it's"], [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    for sym in (True, False):
        text = write_matrix(m, sym)
        assert "'Sequence 1'" in text and "'''odd'" in text and "\nit's" in text
        back = read_matrix(text, sym)
        assert back.ids == m.ids and np.array_equal(back.dense(), m.dense())
