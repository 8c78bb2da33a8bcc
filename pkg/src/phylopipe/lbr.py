"""Local optimization of spanning trees by branch recrafting (LBR).

Edges are revisited shortest first. Removing an edge splits the tree in
two; the pair that reconnects the halves most cheaply replaces it unless
that would make the tree heavier.
"""

from __future__ import annotations

import heapq
from typing import Callable

import numpy as np

from .errors import DataError
from .matrix import DistanceMatrix
from .mst import harmonic_centrality
from .tree import Edge, Tree

Predicate = Callable[[int, int, tuple[int, int], DistanceMatrix], bool]


def contemporary_predicate(u: int, v: int, candidate: tuple[int, int], matrix: DistanceMatrix) -> bool:
    """Whether the candidate pair ``(w, z)`` is at least as close as either is to the far endpoint.

    ``u`` and ``w`` lie on one side of the removed edge, ``v`` and ``z`` on
    the other. The pair is accepted as contemporaries when
    ``D(w, z) <= min(D(w, v), D(z, u))``.
    """
    w, z = candidate
    return matrix.get(w, z) <= min(matrix.get(w, v), matrix.get(z, u))


def _profile_indices(tree: Tree, matrix: DistanceMatrix) -> list[int]:
    if len(tree.nodes) != len(tree.names):
        raise DataError("LBR needs a tree whose nodes are all profiles (a spanning tree)")
    position = {name: i for i, name in enumerate(matrix.ids)}
    if set(tree.names.values()) != set(position):
        raise DataError("tree profiles do not match the matrix profiles")
    return [position[tree.names[node]] for node in range(len(tree.names))]


def run_lbr(tree: Tree, matrix: DistanceMatrix, predicate: Predicate = contemporary_predicate) -> Tree:
    """Recraft a spanning tree of ``matrix`` without increasing its weight.

    Edge weights are read from the matrix, ``D[parent, child]``; lengths
    stored in the input tree are ignored. The root is kept. When an edge
    ``u -> v`` is removed, the reconnecting pair ``(w, z)`` with ``w`` on the
    root side is the cheapest cross pair, ties going to the smaller sum of
    within-side harmonic centralities. If ``predicate`` rejects it, ``w`` is
    the root-side profile closest to ``v`` and ``z`` the far-side profile
    closest to ``u``. The far side is re-rooted at ``z``. Accepted edges
    that are not the lightest in the tree may be revisited once, up to the
    initial edge count in total.
    """
    to_matrix = _profile_indices(tree, matrix)
    from_matrix = {m: node for node, m in enumerate(to_matrix)}
    n = len(to_matrix)
    d = matrix.dense()
    parent = [-1] * n
    children: list[set[int]] = [set() for _ in range(n)]
    for e in tree.edges:
        p, c = to_matrix[e.parent], to_matrix[e.child]
        parent[c] = p
        children[p].add(c)

    work = [(d[parent[c], c], min(parent[c], c), max(parent[c], c)) for c in range(n) if parent[c] >= 0]
    heapq.heapify(work)
    budget = len(work)
    revisited: set[tuple[int, int]] = set()

    while work:
        _, a, b = heapq.heappop(work)
        if parent[b] == a:
            u, v = a, b
        elif parent[a] == b:
            u, v = b, a
        else:
            continue  # edge left the tree after it was queued

        far = np.zeros(n, dtype=bool)
        stack = [v]
        while stack:
            x = stack.pop()
            far[x] = True
            stack.extend(children[x])
        near_nodes = np.flatnonzero(~far)
        far_nodes = np.flatnonzero(far)

        w, z = _closest_pair(d, near_nodes, far_nodes)
        if not predicate(u, v, (w, z), matrix):
            w = int(near_nodes[np.argmin(d[near_nodes, v])])
            z = int(far_nodes[np.argmin(d[far_nodes, u])])
        if (w, z) == (u, v):
            continue

        path = [z]
        while path[-1] != v:
            path.append(parent[path[-1]])
        delta = d[w, z] - d[u, v]
        for lower, upper in zip(path, path[1:]):
            delta += d[lower, upper] - d[upper, lower]
        if delta > 0:
            continue

        children[u].discard(v)
        for lower, upper in zip(path, path[1:]):
            children[upper].discard(lower)
            children[lower].add(upper)
            parent[upper] = lower
        parent[z] = w
        children[w].add(z)

        key = (min(w, z), max(w, z))
        lightest = min(d[parent[c], c] for c in range(n) if parent[c] >= 0)
        if d[w, z] > lightest and key not in revisited and budget > 0:
            revisited.add(key)
            budget -= 1
            heapq.heappush(work, (d[w, z], key[0], key[1]))

    edges = [
        Edge(from_matrix[parent[c]], from_matrix[c], float(d[parent[c], c]))
        for c in range(n) if parent[c] >= 0
    ]
    return Tree(dict(tree.names), edges, tree.root_length)


def _closest_pair(d: np.ndarray, near: np.ndarray, far: np.ndarray) -> tuple[int, int]:
    cross = d[np.ix_(near, far)]
    spread = (harmonic_centrality(d[np.ix_(near, near)])[:, None]
              + harmonic_centrality(d[np.ix_(far, far)])[None, :])
    ties = cross == cross.min()
    spread = np.where(ties, spread, np.inf)
    row, col = np.unravel_index(np.argmin(spread), spread.shape)
    return int(near[row]), int(far[col])
