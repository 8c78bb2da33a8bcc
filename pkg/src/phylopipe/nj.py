"""Neighbour joining: Saitou-Nei, Studier-Keppler and UNJ.

The working matrix shrinks in place: the joined cluster takes the lower
slot and the last live slot moves into the freed one. Each iteration is a
vectorized O(m^2) scan, O(n^3) overall.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .matrix import DistanceMatrix
from .tree import Edge, Tree

VARIANTS = ("saitounei", "studierkeppler", "unj")

# scores closer than this (relative) count as tied
TIE_TOLERANCE = 1e-10


def nj_selection(variant: str, d: np.ndarray, i: int, j: int) -> float:
    """Selection score of the pair (i, j) over the live clusters in ``d``.

    ``studierkeppler`` and ``unj`` use ``(m - 2) D_ij - R_i - R_j`` with full
    row sums. ``saitounei`` uses the total branch length of the star with
    i and j joined, whose sums leave out i and j. Both are minimized and
    rank pairs identically.
    """
    d = np.asarray(d, dtype=float)
    m = d.shape[0]
    if i == j:
        raise ValueError("selection needs two distinct clusters")
    if m < 3:
        raise ValueError("selection needs at least three clusters")
    r = d.sum(axis=1)
    if variant in ("studierkeppler", "unj"):
        return float((m - 2) * d[i, j] - r[i] - r[j])
    if variant == "saitounei":
        return float(_saitou_nei(d[i, j], r[i], r[j], r.sum() / 2, m))
    raise ValueError(f"unknown neighbour-joining variant {variant!r}")


def _saitou_nei(d_ij, r_i, r_j, total, m):
    # R_i - D_ij sums over k != i, j; the remaining pairs sum to total - R_i - R_j + D_ij
    return d_ij / 2 + (r_i + r_j - 2 * d_ij) / (2 * (m - 2)) + (total - r_i - r_j + d_ij) / (m - 2)


def _scores(variant, block, r, m):
    if variant == "saitounei":
        return _saitou_nei(block, r[:, None], r[None, :], r.sum() / 2, m)
    return (m - 2) * block - r[:, None] - r[None, :]


def _pick_pair(scores, node):
    best = scores.min()
    tol = TIE_TOLERANCE * max(1.0, abs(best))
    rows, cols = np.nonzero(scores <= best + tol)
    lo = np.minimum(node[rows], node[cols])
    hi = np.maximum(node[rows], node[cols])
    k = np.lexsort((hi, lo))[0]
    i, j = int(rows[k]), int(cols[k])
    return (i, j) if i < j else (j, i)


def run_nj(matrix: DistanceMatrix, variant: str, check_row_sums: bool = False) -> Tree:
    """Neighbour-joining tree of a symmetric matrix.

    The result is unrooted in substance; it is rooted at the last internal
    node created, which also holds the final edge.

    Parameters
    ----------
    matrix : DistanceMatrix
        Symmetric distances over at least two profiles.
    variant : {"saitounei", "studierkeppler", "unj"}
    check_row_sums : bool
        Compare the incrementally updated row sums with fresh ones at every
        iteration and fail if they drift by more than 1e-6.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown neighbour-joining variant {variant!r}")
    if not matrix.has_symmetric_values():
        raise DataError(f"{variant} needs a symmetric distance matrix")
    n = len(matrix)
    if n < 2:
        raise DataError("neighbour joining needs at least two profiles")
    names = dict(enumerate(matrix.ids))
    d = matrix.dense()
    node = np.arange(n)
    size = np.ones(n)
    r = d.sum(axis=1)
    edges = []
    next_id = n
    m = n
    while m > 2:
        block = d[:m, :m]
        rm = r[:m]
        if check_row_sums and not np.allclose(rm, block.sum(axis=1), rtol=0, atol=1e-6):
            raise AssertionError("incremental row sums drifted from the matrix")
        scores = _scores(variant, block, rm, m)
        np.fill_diagonal(scores, np.inf)
        i, j = _pick_pair(scores, node[:m])
        d_ij = block[i, j]
        if variant == "unj":
            weighted = (block[i] - block[j]) * size[:m]
            spread = weighted.sum() - weighted[i] - weighted[j]
            d_iu = d_ij / 2 + spread / (2 * (n - size[i] - size[j]))
            lam = size[i] / (size[i] + size[j])
        else:
            d_iu = d_ij / 2 + (rm[i] - rm[j]) / (2 * (m - 2))
            lam = 0.5
        d_ju = d_ij - d_iu
        edges.append(Edge(next_id, int(node[i]), float(d_iu)))
        edges.append(Edge(next_id, int(node[j]), float(d_ju)))

        new = lam * (block[i] - d_iu) + (1 - lam) * (block[j] - d_ju)
        new[i] = new[j] = 0.0
        rm += new - block[i] - block[j]
        rm[i] = new.sum()
        block[i, :] = new
        block[:, i] = new
        node[i] = next_id
        size[i] += size[j]
        next_id += 1

        last = m - 1
        if j != last:
            block[j, :] = block[last, :]
            block[:, j] = block[:, last]
            block[j, j] = 0.0
            node[j] = node[last]
            size[j] = size[last]
            rm[j] = rm[last]
        m -= 1

    a, b = int(node[0]), int(node[1])
    parent, child = (a, b) if a > b else (b, a)
    edges.append(Edge(parent, child, float(d[0, 1])))
    return Tree(names, edges)
