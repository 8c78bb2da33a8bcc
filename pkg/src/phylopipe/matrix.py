"""Distance matrices with triangular storage and optional lazy evaluation.

Symmetric matrices keep only the strict lower triangle, ``n * (n - 1) / 2``
cells. A lazy matrix is built from a row function ``compute(i, js)`` that
returns the distances from profile ``i`` to the profiles ``js``; cells are
computed on first access and cached.
"""

from __future__ import annotations

import math
import re
from typing import Callable, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import DataError, ParseError

RowFunction = Callable[[int, np.ndarray], np.ndarray]


def _tri(i: int, j: int) -> int:
    # strict lower triangle, i > j, row-major
    return i * (i - 1) // 2 + j


class DistanceMatrix:
    """Pairwise distances between identified profiles.

    Parameters
    ----------
    ids : sequence of str
        Profile ids, one per row.
    symmetric : bool
        Whether ``D[i, j] == D[j, i]``. Symmetric matrices are stored as a
        triangle, so symmetry holds by construction.
    values : array_like, optional
        Materialized storage: a flat triangle for symmetric matrices or an
        ``(n, n)`` array otherwise. Use :meth:`from_array` to build from a
        square array.
    compute : callable, optional
        Row function for lazy matrices; mutually exclusive with ``values``.
    metric : str, optional
        Name of the distance the values came from, if known.
    """

    def __init__(
        self,
        ids: Sequence[str],
        symmetric: bool = True,
        values=None,
        compute: Optional[RowFunction] = None,
        metric: Optional[str] = None,
    ):
        self.ids = list(ids)
        self.symmetric = symmetric
        self.metric = metric
        self.evaluations = 0
        n = len(self.ids)
        shape = (n * (n - 1) // 2,) if symmetric else (n, n)
        if (values is None) == (compute is None):
            raise ValueError("exactly one of values and compute is required")
        self._compute = compute
        if values is not None:
            store = np.array(values, dtype=float)
            if store.shape != shape:
                raise ValueError(f"storage shape {store.shape} does not match {shape}")
            if not symmetric:
                np.fill_diagonal(store, 0.0)
            self._store = store
            self._known = None
        else:
            self._store = np.zeros(shape)
            self._known = np.zeros(shape, dtype=bool)
            if not symmetric:
                np.fill_diagonal(self._known, True)

    @classmethod
    def from_array(cls, ids: Sequence[str], array, symmetric: Optional[bool] = None,
                   metric: Optional[str] = None) -> "DistanceMatrix":
        """Build from a square array, detecting symmetry when not given."""
        a = np.asarray(array, dtype=float)
        n = len(ids)
        if a.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} array, got {a.shape}")
        if symmetric is None:
            symmetric = bool(np.array_equal(a, a.T))
        if symmetric:
            rows, cols = np.tril_indices(n, -1)
            return cls(ids, True, a[rows, cols], metric=metric)
        return cls(ids, False, a, metric=metric)

    @classmethod
    def lazy(cls, ids: Sequence[str], compute: RowFunction, symmetric: bool = True,
             metric: Optional[str] = None) -> "DistanceMatrix":
        return cls(ids, symmetric, compute=compute, metric=metric)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def size(self) -> int:
        return len(self.ids)

    @property
    def is_lazy(self) -> bool:
        return self._known is not None

    @property
    def storage_size(self) -> int:
        """Number of stored cells."""
        return int(self._store.size)

    def has_symmetric_values(self) -> bool:
        """True for symmetric storage, or square storage whose values happen to be symmetric."""
        if self.symmetric:
            return True
        d = self.dense()
        return bool(np.array_equal(d, d.T))

    def _check(self, i: int, j: int):
        n = len(self.ids)
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"index ({i}, {j}) out of range for {n} profiles")

    def get(self, i: int, j: int) -> float:
        """Distance from profile ``i`` to profile ``j``."""
        self._check(i, j)
        if i == j:
            return 0.0
        if self.symmetric:
            if i < j:
                i, j = j, i
            cell = _tri(i, j)
        else:
            cell = (i, j)
        if self._known is not None and not self._known[cell]:
            value = float(self._compute(i, np.array([j]))[0])
            self.evaluations += 1
            self._store[cell] = value
            self._known[cell] = True
        return float(self._store[cell])

    def __getitem__(self, key: tuple[int, int]) -> float:
        return self.get(*key)

    def row(self, i: int) -> np.ndarray:
        """All distances from profile ``i``, computing missing cells in one batch."""
        n = len(self.ids)
        self._check(i, i)
        if self.symmetric:
            lower = _tri(i, 0) + np.arange(i)
            later = np.arange(i + 1, n)
            upper = later * (later - 1) // 2 + i
            cells = np.concatenate([lower, upper])
            others = np.concatenate([np.arange(i), later])
            if self._known is not None:
                missing = ~self._known[cells]
                if missing.any():
                    values = np.asarray(self._compute(i, others[missing]), dtype=float)
                    self._store[cells[missing]] = values
                    self._known[cells[missing]] = True
                    self.evaluations += int(missing.sum())
            out = np.zeros(n)
            out[others] = self._store[cells]
            return out
        if self._known is not None:
            missing = np.flatnonzero(~self._known[i])
            if missing.size:
                self._store[i, missing] = self._compute(i, missing)
                self._known[i, missing] = True
                self.evaluations += int(missing.size)
        return self._store[i].copy()

    def dense(self) -> np.ndarray:
        """A fresh ``(n, n)`` array of all distances (forces lazy matrices)."""
        n = len(self.ids)
        if self.is_lazy:
            for i in range(n):
                self.row(i)
        if not self.symmetric:
            return self._store.copy()
        out = np.zeros((n, n))
        rows, cols = np.tril_indices(n, -1)
        out[rows, cols] = self._store
        out[cols, rows] = self._store
        return out

    def materialize(self) -> "DistanceMatrix":
        """An eager copy holding the same values."""
        if self.is_lazy:
            self.dense()
        return DistanceMatrix(self.ids, self.symmetric, self._store.copy(), metric=self.metric)

    def map(self, fn: Callable[[np.ndarray], np.ndarray], metric: Optional[str] = None) -> "DistanceMatrix":
        """Apply a vectorized cell-wise transform to the off-diagonal values."""
        if self.is_lazy:
            self.dense()
        store = self._store.copy()
        if self.symmetric:
            store = fn(store)
        else:
            off = ~np.eye(len(self.ids), dtype=bool)
            store[off] = fn(store[off])
        return DistanceMatrix(self.ids, self.symmetric, store, metric=metric)

    def __repr__(self) -> str:
        kind = "symmetric" if self.symmetric else "asymmetric"
        mode = "lazy" if self.is_lazy else "eager"
        return f"<DistanceMatrix {len(self.ids)} profiles, {kind}, {mode}>"


def format_number(value: float) -> str:
    """Shortest text that reads back to the same float; integers lose the ``.0``."""
    value = float(value)
    if not math.isfinite(value):
        raise DataError(f"cannot write non-finite distance {value}")
    if value == int(value) and abs(value) < 2**53:
        return str(int(value))
    return repr(value)


def _parse_float(token: str, number: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"line {number}: {token!r} is not a number") from None
    if not math.isfinite(value):
        raise ParseError(f"line {number}: distance must be finite, got {token!r}")
    return value


# ids with whitespace are written in single quotes, doubling embedded quotes
_QUOTED_ID = re.compile(r"\s*'((?:[^']|'')*)'(?=\s|$)")


def _split_row(line: str) -> list[str]:
    m = _QUOTED_ID.match(line)
    if m is None:
        return line.split()
    return [m.group(1).replace("''", "'")] + line[m.end():].split()


def _quote_id(name: str) -> str:
    if name and not any(c.isspace() for c in name) and not name.startswith("'"):
        return name
    return "'" + name.replace("'", "''") + "'"


def read_matrix(source: Union[str, TextIO], symmetric: bool) -> DistanceMatrix:
    """Read a square (asymmetric) or lower-triangle (symmetric) matrix.

    Both formats start with the profile count; each following line holds a
    profile id and its distances. In lower-triangle form row ``k`` carries
    only the ``k - 1`` distances to earlier profiles. An id containing
    whitespace is enclosed in single quotes.
    """
    text = source if isinstance(source, str) else source.read()
    lines = [(k, _split_row(line)) for k, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise ParseError("empty matrix input")
    first_number, first = lines[0]
    if len(first) != 1 or not first[0].isdigit():
        raise ParseError(f"line {first_number}: expected the profile count")
    n = int(first[0])
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} matrix rows, found {len(rows)}")
    ids = []
    if symmetric:
        store = np.zeros(n * (n - 1) // 2)
        for k, (number, parts) in enumerate(rows):
            if len(parts) != k + 1:
                raise ParseError(f"line {number}: expected {k} distances, found {len(parts) - 1}")
            ids.append(parts[0])
            for j, token in enumerate(parts[1:]):
                store[_tri(k, j)] = _parse_float(token, number)
    else:
        store = np.zeros((n, n))
        for k, (number, parts) in enumerate(rows):
            if len(parts) != n + 1:
                raise ParseError(f"line {number}: expected {n} distances, found {len(parts) - 1}")
            ids.append(parts[0])
            store[k] = [_parse_float(t, number) for t in parts[1:]]
            if store[k, k] != 0:
                raise ParseError(f"line {number}: distance of {parts[0]!r} to itself is not 0")
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate profile ids in matrix")
    return DistanceMatrix(ids, symmetric, store)


def write_matrix(matrix: DistanceMatrix, symmetric: bool) -> str:
    """Serialize in square form, or lower-triangle form for symmetric matrices."""
    if symmetric and not matrix.symmetric:
        raise DataError("an asymmetric matrix cannot be written in symmetric format")
    d = matrix.dense()
    lines = [str(len(matrix))]
    for i, name in enumerate(matrix.ids):
        stop = i if symmetric else len(matrix)
        lines.append(" ".join([_quote_id(name)] + [format_number(x) for x in d[i, :stop]]))
    return "\n".join(lines) + "\n"


READ_FORMATS = {"symmetric": True, "asymmetric": False}
