"""Independent exact checkers and a brute-force rainbow-embedding oracle.

Nothing here looks at pipeline state: inputs are plain graphs, vertex maps
and edge lists.  Every checker returns a :class:`Verdict` whose violation
list is sorted canonically and truncated to :data:`MAX_VIOLATIONS` entries;
``total`` keeps the full count.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapExceeded, GroupError
from .graphcore import ColouredGraph, partition_labels
from .groups import AbelianGroup

__all__ = [
    "MAX_VIOLATIONS",
    "Violation",
    "Verdict",
    "check_embedding",
    "check_rainbow",
    "check_packing",
    "check_odc",
    "check_harmonious",
    "exhaustive_rainbow_search",
    "copy_edges",
]

MAX_VIOLATIONS = 100
DEFAULT_SEARCH_CAP = 10**7

VertexMap = Mapping[int, int] | Sequence[int]


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple

    def as_list(self) -> list:
        return [self.kind, _jsonable(self.witness)]


def _jsonable(x: Any) -> Any:
    if isinstance(x, (tuple, list)):
        return [_jsonable(y) for y in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass(frozen=True)
class Verdict:
    """Outcome of a checker: ``ok`` iff there are no violations.

    ``coverage`` is only set by :func:`check_packing`: it is true when the
    copies are pairwise edge-disjoint and together cover every host edge.
    """

    ok: bool
    violations: tuple[Violation, ...] = ()
    total: int = 0
    coverage: bool | None = None

    def as_dict(self) -> dict:
        out = {
            "ok": self.ok,
            "violation_count": self.total,
            "violations": [v.as_list() for v in self.violations],
        }
        if self.coverage is not None:
            out["coverage"] = self.coverage
        return out


def _verdict(found: list[Violation], coverage: bool | None = None) -> Verdict:
    found = sorted(found, key=lambda v: (v.kind, repr(v.witness)))
    return Verdict(
        ok=not found,
        violations=tuple(found[:MAX_VIOLATIONS]),
        total=len(found),
        coverage=coverage,
    )


def _as_map(phi: VertexMap) -> dict[int, int]:
    if isinstance(phi, Mapping):
        return {int(k): int(v) for k, v in phi.items()}
    return {i: int(v) for i, v in enumerate(phi)}


def check_embedding(H: ColouredGraph, G: ColouredGraph, phi: VertexMap) -> Verdict:
    """Injectivity and edge preservation of ``phi: V(H) -> V(G)``."""
    m = _as_map(phi)
    found: list[Violation] = []
    for x in range(H.vertex_count):
        if x not in m:
            found.append(Violation("undefined", (x,)))
        elif not 0 <= m[x] < G.vertex_count:
            found.append(Violation("out-of-range", (x, m[x])))
    owner: dict[int, int] = {}
    for x in sorted(m):
        v = m[x]
        if v in owner:
            found.append(Violation("injectivity", (owner[v], x, v)))
        else:
            owner[v] = x
    for x, y in H.edge_list():
        if x in m and y in m and not G.has_edge(m[x], m[y]):
            found.append(Violation("non-edge", ((x, y), (m[x], m[y]))))
    return _verdict(found)


def check_rainbow(G: ColouredGraph, phi: VertexMap, H: ColouredGraph) -> Verdict:
    """Pairwise disjointness of the colour sets on the image edges of ``H``."""
    m = _as_map(phi)
    found: list[Violation] = []
    first: dict[int, tuple[int, int]] = {}
    for x, y in H.edge_list():
        if x not in m or y not in m:
            found.append(Violation("undefined", ((x, y),)))
            continue
        u, v = m[x], m[y]
        if not G.has_edge(u, v):
            found.append(Violation("non-edge", ((x, y), (u, v))))
            continue
        for c in G.colours_of(u, v):
            if c in first:
                found.append(Violation("colour-clash", (G.label_of(c), first[c], (x, y))))
            else:
                first[c] = (x, y)
    return _verdict(found)


def copy_edges(H: ColouredGraph, phi: VertexMap) -> list[tuple[int, int]]:
    """Image edge set of ``H`` under ``phi`` in canonical orientation."""
    m = _as_map(phi)
    out = []
    for x, y in H.edge_list():
        u, v = m[x], m[y]
        out.append((u, v) if u < v else (v, u))
    return out


def _canonical(e: Sequence[int]) -> tuple[int, int]:
    u, v = int(e[0]), int(e[1])
    return (u, v) if u < v else (v, u)


def check_packing(copies: Sequence[Iterable[Sequence[int]]], G: ColouredGraph) -> Verdict:
    """Pairwise edge-disjointness of ``copies`` inside ``G``.

    The verdict's ``coverage`` flag reports whether a non-empty disjoint
    family covers every edge of ``G`` (a decomposition).
    """
    found: list[Violation] = []
    owner: dict[tuple[int, int], int] = {}
    for i, edges in enumerate(copies):
        seen_here: set[tuple[int, int]] = set()
        for e in edges:
            e = _canonical(e)
            if not G.has_edge(*e):
                found.append(Violation("not-in-host", (i, e)))
                continue
            if e in seen_here:
                found.append(Violation("repeated-in-copy", (i, e)))
                continue
            seen_here.add(e)
            if e in owner:
                found.append(Violation("shared-edge", (owner[e], i, e)))
            else:
                owner[e] = i
    coverage = bool(copies) and not found and len(owner) == G.edge_count
    return _verdict(found, coverage=coverage)


def check_odc(copies: Sequence[Iterable[Sequence[int]]], G: ColouredGraph) -> Verdict:
    """Approximate orthogonal double cover conditions.

    Every edge of ``G`` lies in at most two copies and any two copies share
    at most one edge.
    """
    found: list[Violation] = []
    holders: dict[tuple[int, int], list[int]] = defaultdict(list)
    for i, edges in enumerate(copies):
        for e in {_canonical(e) for e in edges}:
            if not G.has_edge(*e):
                found.append(Violation("not-in-host", (i, e)))
                continue
            holders[e].append(i)
    overlap: dict[tuple[int, int], int] = defaultdict(int)
    for e, hs in holders.items():
        if len(hs) > 2:
            found.append(Violation("multiplicity", (e, len(hs))))
        for a, b in combinations(hs, 2):
            overlap[(a, b)] += 1
    for pair, k in overlap.items():
        if k > 1:
            found.append(Violation("pair-overlap", (pair, k)))
    return _verdict(found)


def check_harmonious(
    H: ColouredGraph, f: VertexMap, group_table: AbelianGroup | Sequence[Sequence[int]] | np.ndarray
) -> Verdict:
    """Injectivity of ``f`` and distinctness of the edge sums ``f(x)+f(y)``."""
    group = group_table if isinstance(group_table, AbelianGroup) else AbelianGroup.from_table(group_table)
    m = _as_map(f)
    for x, a in m.items():
        if not group.contains(a):
            raise GroupError(f"label {a} of vertex {x} is not an element of {group!r}")
    found: list[Violation] = []
    for x in range(H.vertex_count):
        if x not in m:
            found.append(Violation("undefined", (x,)))
    owner: dict[int, int] = {}
    for x in sorted(m):
        if m[x] in owner:
            found.append(Violation("label-collision", (owner[m[x]], x, m[x])))
        else:
            owner[m[x]] = x
    sums: dict[int, tuple[int, int]] = {}
    for x, y in H.edge_list():
        if x not in m or y not in m:
            continue
        s = group.add(m[x], m[y])
        if s in sums:
            found.append(Violation("sum-collision", (sums[s], (x, y), s)))
        else:
            sums[s] = (x, y)
    return _verdict(found)


def exhaustive_rainbow_search(
    H: ColouredGraph,
    G: ColouredGraph,
    clusters: tuple[Sequence[Sequence[int]], Sequence[Sequence[int]]] | None = None,
    *,
    cap: int = DEFAULT_SEARCH_CAP,
    stats: dict | None = None,
) -> dict[int, int] | None:
    """Backtracking over all (cluster-respecting) injections of ``H`` into ``G``.

    ``clusters`` is an optional pair ``(X, V)`` of parallel partitions; a
    vertex of ``X[i]`` may only go to ``V[i]``.  Returns a rainbow embedding
    or ``None`` once the whole space is exhausted.  Raises
    :class:`CapExceeded` after ``cap`` search nodes.
    """
    nh = H.vertex_count
    if clusters is not None:
        X, V = clusters
        xlab = partition_labels(nh, X, cover=False)
        allowed = [tuple(sorted(V[xlab[x]])) if xlab[x] >= 0 else () for x in range(nh)]
    else:
        allowed = [tuple(range(G.vertex_count))] * nh
    adj = G.adjacency_matrix
    cols = {e: cs for e, cs in zip(G.edge_list(), G.edge_colours)}

    # Order: repeatedly take the unplaced vertex with most placed neighbours,
    # breaking ties by degree, so edge constraints bite early.
    order: list[int] = []
    placed = set()
    while len(order) < nh:
        best = max(
            (x for x in range(nh) if x not in placed),
            key=lambda x: (sum(1 for y in H.neighbours(x) if y in placed), H.degree(x), -x),
        )
        order.append(best)
        placed.add(best)
    pos = {x: i for i, x in enumerate(order)}
    earlier = {x: [y for y in H.neighbours(x) if pos[y] < pos[x]] for x in order}

    assign: dict[int, int] = {}
    used_v: set[int] = set()
    used_c: set[int] = set()
    nodes = 0

    def rec(k: int) -> bool:
        nonlocal nodes
        if k == nh:
            return True
        x = order[k]
        for v in allowed[x]:
            if v in used_v:
                continue
            nodes += 1
            if nodes > cap:
                raise CapExceeded(f"exhaustive search exceeded {cap} nodes")
            new: list[int] = []
            ok = True
            for y in earlier[x]:
                w = assign[y]
                if not adj[v, w]:
                    ok = False
                    break
                for c in cols[(v, w) if v < w else (w, v)]:
                    if c in used_c or c in new:
                        ok = False
                        break
                    new.append(c)
                if not ok:
                    break
            if not ok:
                continue
            assign[x] = v
            used_v.add(v)
            used_c.update(new)
            if rec(k + 1):
                return True
            del assign[x]
            used_v.discard(v)
            used_c.difference_update(new)
        return False

    found = rec(0)
    if stats is not None:
        stats["nodes"] = nodes
    if not found:
        return None
    result = dict(sorted(assign.items()))
    assert check_embedding(H, G, result).ok and check_rainbow(G, result, H).ok
    return result
