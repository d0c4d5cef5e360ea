"""Seeded generators for graphs and blow-up instances."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .graphcore import BlowUpInstance, ColouredGraph
from .hypermatch import Hypergraph

__all__ = [
    "random_tree",
    "path_graph",
    "random_matchings",
    "random_bipartite_host",
    "rainbow_complete_bipartite",
    "matching_instance",
    "random_regular_hypergraph",
]


def random_tree(edges: int, max_degree: int, seed: int) -> ColouredGraph:
    """Random recursive tree with ``edges`` edges and maximum degree at most ``max_degree``.

    Vertex ``v`` attaches to a uniformly random earlier vertex of free
    capacity; the result is a tree on ``edges + 1`` vertices.
    """
    if max_degree < 1 or (max_degree == 1 and edges > 1):
        raise ValueError("max_degree is too small for a tree with that many edges")
    rng = np.random.default_rng([seed, 0x7E])
    deg = [0] * (edges + 1)
    out = []
    for v in range(1, edges + 1):
        free = [u for u in range(v) if deg[u] < max_degree]
        u = free[int(rng.integers(len(free)))]
        out.append((u, v))
        deg[u] += 1
        deg[v] += 1
    return ColouredGraph(edges + 1, out)


def path_graph(edges: int) -> ColouredGraph:
    """The path ``0 - 1 - ... - edges``."""
    return ColouredGraph(edges + 1, [(i, i + 1) for i in range(edges)])


def random_matchings(n: int, count: int, size: int, seed: int) -> ColouredGraph:
    """Union of ``count`` random matchings of ``size`` edges between ``0..n-1`` and ``n..2n-1``.

    Repeated pairs are resampled, so the result is simple with maximum
    degree at most ``count``.
    """
    if size > n:
        raise ValueError("a matching between two n-sets has at most n edges")
    rng = np.random.default_rng([seed, 0x4D])
    edges: set[tuple[int, int]] = set()
    for _ in range(count):
        for _attempt in range(100):
            left = rng.choice(n, size=size, replace=False)
            right = rng.choice(n, size=size, replace=False)
            new = {(int(a), n + int(b)) for a, b in zip(left, right)}
            if not new & edges:
                edges |= new
                break
        else:
            raise ValueError("could not place disjoint matchings; lower count or size")
    return ColouredGraph(2 * n, sorted(edges))


def random_bipartite_host(n: int, d: float, seed: int, colouring: str = "distance") -> ColouredGraph:
    """Random bipartite graph ``G(n, n, d)`` on ``0..n-1`` and ``n..2n-1``.

    ``colouring="distance"`` colours ``(i, n + j)`` by
    ``min(j - i mod n, i - j mod n)`` (locally 2-bounded);
    ``"shift"`` by ``j - i mod n`` (proper); ``"rainbow"`` gives every edge
    its own colour.
    """
    rng = np.random.default_rng([seed, 0xB1])
    mask = rng.random((n, n)) < d
    ii, jj = np.nonzero(mask)
    edges = np.stack([ii, jj + n], axis=1)
    if colouring == "distance":
        diff = (jj - ii) % n
        cols = np.minimum(diff, (n - diff) % n)
    elif colouring == "shift":
        cols = (jj - ii) % n
    elif colouring == "rainbow":
        cols = np.arange(len(ii))
    else:
        raise ValueError(f"unknown colouring {colouring!r}")
    return ColouredGraph(2 * n, edges, cols.tolist())


def rainbow_complete_bipartite(n: int) -> ColouredGraph:
    """``K_{n,n}`` on ``0..n-1`` and ``n..2n-1`` with every edge its own colour."""
    edges = [(i, n + j) for i in range(n) for j in range(n)]
    return ColouredGraph(2 * n, edges, list(range(len(edges))))


def matching_instance(n: int, d: float, seed: int, *, count: int = 2, size: int | None = None,
                      colouring: str = "distance", gamma: float = 0.1, eps: float = 0.2) -> BlowUpInstance:
    """Two-cluster instance: random host ``G(n, n, d)`` and ``H`` a union of random matchings."""
    G = random_bipartite_host(n, d, seed, colouring)
    H = random_matchings(n, count, n if size is None else size, seed)
    halves = [list(range(n)), list(range(n, 2 * n))]
    return BlowUpInstance(H, G, halves, halves, eps=eps, d=d, gamma=gamma)


def random_regular_hypergraph(n: int, degree: int, seed: int, *, uniformity: int = 3,
                              max_codegree: int = 3) -> Hypergraph:
    """Near-regular ``uniformity``-uniform hypergraph on ``n`` vertices.

    Configuration model: ``degree`` copies of every vertex are shuffled and
    cut into blocks.  Blocks that repeat a vertex, or that would push some
    vertex pair above ``max_codegree``, are dropped, so degrees are at most
    ``degree`` and usually very close to it.
    """
    if uniformity < 2:
        raise ValueError("uniformity must be at least 2")
    rng = np.random.default_rng([seed, 0x48])
    stubs = rng.permutation(np.repeat(np.arange(n), degree))
    stubs = stubs[: len(stubs) - len(stubs) % uniformity].reshape(-1, uniformity)
    pairs: dict[tuple[int, int], int] = {}
    kept = []
    for row in np.sort(stubs, axis=1).tolist():
        if len(set(row)) < uniformity:
            continue
        keys = list(combinations(row, 2))
        if any(pairs.get(k, 0) >= max_codegree for k in keys):
            continue
        for k in keys:
            pairs[k] = pairs.get(k, 0) + 1
        kept.append(row)
    return Hypergraph(n, np.array(kept, dtype=np.int64).reshape(-1, uniformity))
