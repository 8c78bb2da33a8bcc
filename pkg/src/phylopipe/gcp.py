"""Agglomerative clustering by globally closest pairs.

Six reductions share one driver: SL, CL, UPGMA, UPGMC, WPGMA and WPGMC.
Every row keeps a cached nearest neighbour, so a join costs O(n) updates.
Rows whose neighbour was merged keep the old distance as a lower bound and
are rescanned only if they reach the front of the selection.
"""

from __future__ import annotations

import math

from .errors import DataError
from .matrix import DistanceMatrix
from .tree import Edge, Tree


def _sl(d_ik, d_jk, d_ij, size_i, size_j):
    return d_ik if d_ik < d_jk else d_jk


def _cl(d_ik, d_jk, d_ij, size_i, size_j):
    return d_ik if d_ik > d_jk else d_jk


def _upgma(d_ik, d_jk, d_ij, size_i, size_j):
    return (size_i * d_ik + size_j * d_jk) / (size_i + size_j)


def _upgmc(d_ik, d_jk, d_ij, size_i, size_j):
    total = size_i + size_j
    return (size_i * d_ik + size_j * d_jk) / total - size_i * size_j * d_ij / (total * total)


def _wpgma(d_ik, d_jk, d_ij, size_i, size_j):
    return (d_ik + d_jk) / 2


def _wpgmc(d_ik, d_jk, d_ij, size_i, size_j):
    return (d_ik + d_jk) / 2 - d_ij / 4


REDUCTIONS = {
    "sl": _sl,
    "cl": _cl,
    "upgma": _upgma,
    "upgmc": _upgmc,
    "wpgma": _wpgma,
    "wpgmc": _wpgmc,
}

VARIANTS = tuple(REDUCTIONS)


def reduce_dissimilarity(variant: str, d_ik: float, d_jk: float, d_ij: float = 0.0,
                         size_i: int = 1, size_j: int = 1) -> float:
    """Dissimilarity from the union of clusters i and j to a third cluster k."""
    if size_i < 1 or size_j < 1:
        raise ValueError("cluster sizes must be at least 1")
    try:
        fn = REDUCTIONS[variant]
    except KeyError:
        raise ValueError(f"unknown clustering variant {variant!r}") from None
    return fn(d_ik, d_jk, d_ij, size_i, size_j)


def run_gcp(matrix: DistanceMatrix, variant: str) -> Tree:
    """Build a rooted dendrogram by repeatedly joining the closest pair.

    Ties on the distance go to the pair with the smallest (lower, higher)
    node ids, where leaves are ``0..n-1`` and each join creates the next
    id. A join at distance ``d`` sits at height ``d / 2``; edge lengths are
    height differences, so they may be negative for centroid methods.
    """
    reduce = REDUCTIONS.get(variant)
    if reduce is None:
        raise ValueError(f"unknown clustering variant {variant!r}")
    if not matrix.has_symmetric_values():
        raise DataError(f"{variant} needs a symmetric distance matrix")
    n = len(matrix)
    if n == 0:
        raise DataError("cannot cluster an empty matrix")
    names = dict(enumerate(matrix.ids))
    if n == 1:
        return Tree(names)

    d = matrix.dense().tolist()
    node = list(range(n))
    size = [1] * n
    height = [0.0] * n
    live = list(range(n))
    nn = [0] * n
    nn_d = [0.0] * n
    # a stale row's nn_d is only a lower bound; it is rescanned on demand
    stale = [False] * n

    def rescan(i):
        row = d[i]
        best_k = -1
        best_d = math.inf
        best_id = 0
        for k in live:
            if k == i:
                continue
            x = row[k]
            if x < best_d or (x == best_d and node[k] < best_id):
                best_k, best_d, best_id = k, x, node[k]
        nn[i] = best_k
        nn_d[i] = best_d
        stale[i] = False

    def pair_key(i):
        a, b = node[i], node[nn[i]]
        return (a, b) if a < b else (b, a)

    for i in live:
        rescan(i)

    edges = []
    next_id = n
    while len(live) > 1:
        while True:
            bi = live[0]
            bd = nn_d[bi]
            for i in live:
                x = nn_d[i]
                if x < bd:
                    bi, bd = i, x
                elif x == bd and not stale[bi] and (stale[i] or pair_key(i) < pair_key(bi)):
                    bi = i
            if not stale[bi]:
                break
            rescan(bi)
        a, b = sorted((bi, nn[bi]))
        h = bd / 2
        edges.append(Edge(next_id, node[a], h - height[a]))
        edges.append(Edge(next_id, node[b], h - height[b]))

        live.remove(b)
        row_a, row_b = d[a], d[b]
        sa, sb = size[a], size[b]
        for k in live:
            if k != a:
                x = reduce(row_a[k], row_b[k], bd, sa, sb)
                row_a[k] = x
                d[k][a] = x
        node[a] = next_id
        size[a] = sa + sb
        height[a] = h
        next_id += 1

        rescan(a)
        for k in live:
            if k == a:
                continue
            x = d[k][a]
            # the merged cluster has the largest id, so it only wins strictly
            if x < nn_d[k]:
                nn[k] = a
                nn_d[k] = x
                stale[k] = False
            elif nn[k] == a or nn[k] == b:
                stale[k] = True
    return Tree(names, edges)
