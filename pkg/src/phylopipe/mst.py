"""Minimum spanning trees over profile distances.

``run_goeburst`` is Kruskal's algorithm with locus-variant tie-breaks and
``run_edmonds`` is the Chu-Liu/Edmonds minimum arborescence, contracting
every cycle of a round at once.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Optional

import numpy as np

from .dataset import Dataset
from .errors import DataError
from .matrix import DistanceMatrix
from .tree import Edge, Tree

# stands in for a zero distance in the harmonic mean
ZERO_DISTANCE = 1e-9


def lv_counts(matrix: DistanceMatrix, node: int, max_level: int) -> list[int]:
    """``lv[m]`` for ``m = 1..max_level``: profiles at distance exactly ``m`` from ``node``."""
    row = np.delete(matrix.row(node), node)
    return [int(np.count_nonzero(row == level)) for level in range(1, max_level + 1)]


def _lv_table(d: np.ndarray, levels: int) -> np.ndarray:
    # (n, levels); column m-1 counts SLVs for m=1, DLVs for m=2, ...
    return np.stack([np.count_nonzero(d == level, axis=1) for level in range(1, levels + 1)], axis=1)


def harmonic_centrality(d: np.ndarray) -> np.ndarray:
    """``Q_i = (n - 1) / sum_j 1 / D_ij`` over each row of a square array.

    A single profile gets 0.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if n < 2:
        return np.zeros(n)
    safe = np.where(d == 0, ZERO_DISTANCE, d)
    inverse = 1.0 / safe
    np.fill_diagonal(inverse, 0.0)
    return (n - 1) / inverse.sum(axis=1)


def _frequencies(matrix: DistanceMatrix, dataset: Optional[Dataset]) -> np.ndarray:
    if dataset is None:
        return np.ones(len(matrix), dtype=np.int64)
    lookup = dict(zip(dataset.ids, dataset.frequencies()))
    try:
        return np.array([lookup[name] for name in matrix.ids], dtype=np.int64)
    except KeyError as exc:
        raise DataError(f"profile {exc.args[0]!r} is in the matrix but not in the dataset") from None


def _orient(n: int, pairs: list[tuple[int, int]], root: int, d: np.ndarray) -> list[Edge]:
    adjacent: list[list[int]] = [[] for _ in range(n)]
    for a, b in pairs:
        adjacent[a].append(b)
        adjacent[b].append(a)
    edges = []
    seen = [False] * n
    seen[root] = True
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in sorted(adjacent[v]):
            if not seen[w]:
                seen[w] = True
                edges.append(Edge(v, w, float(d[v, w])))
                queue.append(w)
    return edges


def run_goeburst(matrix: DistanceMatrix, lvs: int = 3, dataset: Optional[Dataset] = None) -> Tree:
    """goeBURST spanning tree of a symmetric integer matrix.

    Edges are taken by ascending distance. Equal distances are resolved by
    the endpoints' locus-variant counts at levels ``1..lvs`` (larger first,
    comparing the better endpoint and then the worse one), then by
    occurrence frequency, then by profile order. The tree is rooted at the
    founder, the profile with the best counts, frequency and order.

    ``lvs`` at least the largest distance (for instance the locus count)
    gives goeBURST Full.
    """
    if not matrix.has_symmetric_values():
        raise DataError("goeBURST needs a symmetric distance matrix")
    if lvs < 1:
        raise ValueError("lvs must be at least 1")
    n = len(matrix)
    if n == 0:
        raise DataError("cannot build a spanning tree of an empty matrix")
    names = dict(enumerate(matrix.ids))
    if n == 1:
        return Tree(names)
    d = matrix.dense()
    lv = _lv_table(d, lvs)
    freq = _frequencies(matrix, dataset)

    i, j = np.triu_indices(n, 1)
    # np.lexsort sorts by the last key first
    keys = [j, i, -np.minimum(freq[i], freq[j]), -np.maximum(freq[i], freq[j])]
    for level in reversed(range(lvs)):
        a, b = lv[i, level], lv[j, level]
        keys += [-np.minimum(a, b), -np.maximum(a, b)]
    keys.append(d[i, j])
    order = np.lexsort(keys)

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for a, b in zip(i[order].tolist(), j[order].tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            chosen.append((a, b))
            if len(chosen) == n - 1:
                break

    founder_keys = [np.arange(n), -freq] + [-lv[:, level] for level in reversed(range(lvs))]
    founder = int(np.lexsort(founder_keys)[0])
    return Tree(names, _orient(n, chosen, founder, d))


def run_edmonds(matrix: DistanceMatrix) -> Tree:
    """Minimum arborescence with arcs ``i -> j`` weighted ``D_ij``.

    The root is the profile with the smallest harmonic centrality (ties to
    the lower index). Whenever several arcs tie for the cheapest way into a
    node, the one leaving the source with smaller centrality (then lower
    index) is taken.
    """
    n = len(matrix)
    if n == 0:
        raise DataError("cannot build an arborescence of an empty matrix")
    names = dict(enumerate(matrix.ids))
    if n == 1:
        return Tree(names)
    d = matrix.dense()
    q = harmonic_centrality(d)
    by_centrality = np.lexsort((np.arange(n), q))
    root = int(by_centrality[0])
    rank = np.empty(n, dtype=np.int64)
    rank[by_centrality] = np.arange(n)
    arcs = _arborescence(d.T.tolist(), rank.tolist(), root)
    edges = [Edge(s, t, float(d[s, t])) for s, t in arcs]
    return Tree(names, edges)


def _arborescence(weight, rank, root):
    """Chu-Liu/Edmonds in O(n^2): grow paths, contracting cycles as they close.

    ``weight[v][x]`` is the reduced weight of the cheapest arc from original
    node ``x`` into super-node ``v`` and ``target[v][x]`` the original node
    it enters. A contracted cycle reuses the slot of its first member and
    ``owner`` maps every original node to the slot that now holds it.
    """
    n = len(weight)
    inf = math.inf
    target = [None] * n  # None: every arc enters the slot's own node
    for v in range(n):
        weight[v][v] = inf
    owner = list(range(n))
    members = [[v] for v in range(n)]
    done = [False] * n
    done[root] = True
    label = list(range(n))  # contraction-forest node held by each slot
    chosen = {}  # forest node -> (reduced weight, source, target)
    children = {}
    parent = {}
    next_label = n

    def select(v):
        row = weight[v]
        low = min(row)
        x = row.index(low)
        if row.count(low) > 1:
            x = min((y for y in range(n) if row[y] == low), key=rank.__getitem__)
        return x, low

    for start in range(n):
        if done[start] or owner[start] != start:
            continue
        path = [start]
        v = start
        while True:
            x, low = select(v)
            chosen[label[v]] = (low, x, v if target[v] is None else target[v][x])
            u = owner[x]
            if done[u]:
                for w in path:
                    done[w] = True
                break
            if u not in path:
                path.append(u)
                v = u
                continue

            cycle = path[path.index(u):]
            head = cycle[0]
            # arcs into the cycle are priced relative to the cycle arc they replace
            merged_w = [inf] * n
            merged_t = [0] * n
            for w in cycle:
                cut = chosen[label[w]][0]
                row, into = weight[w], target[w]
                for y in range(n):
                    c = row[y] - cut
                    if c < merged_w[y]:
                        merged_w[y] = c
                        merged_t[y] = w if into is None else into[y]
            combined = []
            for w in cycle:
                combined.extend(members[w])
            for y in combined:
                merged_w[y] = inf
                owner[y] = head
            weight[head], target[head], members[head] = merged_w, merged_t, combined
            for w in cycle[1:]:
                weight[w] = target[w] = members[w] = None
            children[next_label] = [label[w] for w in cycle]
            for w in cycle:
                parent[label[w]] = next_label
            label[head] = next_label
            next_label += 1
            path = path[:len(path) - len(cycle)] + [head]
            v = head

    # expand: a super-node's chosen arc breaks the cycle arc of the member it
    # enters; every other member keeps its own chosen arc
    arcs = []
    pending = [label[x] for x in range(n) if owner[x] == x and x != root]
    while pending:
        top = pending.pop()
        _, src, dst = chosen[top]
        arcs.append((src, dst))
        on_path = [dst]
        while on_path[-1] != top:
            on_path.append(parent[on_path[-1]])
        on_path_set = set(on_path)
        for node in on_path:
            for child in children.get(node, ()):
                if child not in on_path_set:
                    pending.append(child)
    return sorted(arcs, key=lambda arc: arc[1])
