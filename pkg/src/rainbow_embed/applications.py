"""Applications of rainbow embeddings to packings and labellings.

A rainbow copy of ``H`` in a host coloured by the orbits of a group ``Gamma``
yields ``|Gamma|`` pairwise edge-disjoint copies when every edge orbit has
exactly ``|Gamma|`` edges: distinct images of one copy can only share an
edge if two edges of the copy lie in the same orbit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import CapExceeded, GateError, GroupError, InstanceError, VerificationError
from .graphcore import BlowUpInstance, ColouredGraph, colouring_stats
from .groups import DEFAULT_ORDER_CAP, AbelianGroup
from .pipeline import PipelineConfig, Transcript, embed_quasirandom, embed_rainbow
from .verify import Verdict, check_harmonious, check_odc, check_packing, check_rainbow, copy_edges

__all__ = [
    "GroupAction",
    "PackingResult",
    "OdcResult",
    "HarmoniousResult",
    "distance_colouring",
    "orbit_colouring",
    "rotation",
    "cyclic_packing",
    "bipartite_packing",
    "odc_cover",
    "harmonious_labelling",
    "bipartition",
]

Perm = tuple[int, ...]


# ------------------------------------------------------------------ groups
@dataclass(frozen=True)
class GroupAction:
    """A permutation group acting on the vertices of a graph.

    ``elements`` is the eagerly enumerated group (identity first) and
    ``orbit_of_edge`` maps every canonical edge ``(u, v)`` with ``u < v`` to
    its orbit id.
    """

    generator_perms: tuple[Perm, ...]
    elements: tuple[Perm, ...]
    orbit_of_edge: Mapping[tuple[int, int], int]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def orbit_sizes(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for o in self.orbit_of_edge.values():
            out[o] = out.get(o, 0) + 1
        return out

    def apply(self, perm: Perm, edge: Sequence[int]) -> tuple[int, int]:
        a, b = perm[edge[0]], perm[edge[1]]
        return (a, b) if a < b else (b, a)


def _compose(p: Perm, q: Perm) -> Perm:
    """``p`` after ``q``."""
    return tuple(p[i] for i in q)


def enumerate_group(generators: Sequence[Perm], n: int, cap: int = DEFAULT_ORDER_CAP) -> tuple[Perm, ...]:
    """All products of ``generators``, identity first, in breadth-first order."""
    ident = tuple(range(n))
    seen = {ident}
    out = [ident]
    queue = deque([ident])
    while queue:
        p = queue.popleft()
        for g in generators:
            q = _compose(g, p)
            if q not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(f"the group has more than {cap} elements")
                seen.add(q)
                out.append(q)
                queue.append(q)
    return tuple(out)


def rotation(n: int, step: int = 1) -> Perm:
    """The permutation ``i -> i + step (mod n)``."""
    return tuple((i + step) % n for i in range(n))


def orbit_colouring(
    g: ColouredGraph,
    generators: Sequence[Sequence[int]],
    *,
    full_orbits: bool = False,
    cap: int = DEFAULT_ORDER_CAP,
) -> tuple[ColouredGraph, GroupAction]:
    """Recolour ``g`` by the edge orbits of the group generated by ``generators``.

    Every generator must be an automorphism of the underlying graph.  Orbit
    ids are numbered in order of the smallest edge of each orbit.  With
    ``full_orbits`` every orbit must have exactly ``|Gamma|`` edges.
    """
    n = g.vertex_count
    gens: list[Perm] = []
    for p in generators:
        p = tuple(int(x) for x in p)
        if sorted(p) != list(range(n)):
            raise GroupError(f"generator is not a permutation of {n} vertices")
        for u, v in g.edge_list():
            if not g.has_edge(p[u], p[v]):
                raise GroupError(f"generator maps edge {u} {v} to a non-edge")
        gens.append(p)
    elements = enumerate_group(gens, n, cap)
    edges = sorted(tuple(e) for e in g.edge_list())
    orbit: dict[tuple[int, int], int] = {}
    next_id = 0
    for e in edges:
        if e in orbit:
            continue
        # Orbits of the group equal orbits under the generators.
        orbit[e] = next_id
        queue = deque([e])
        while queue:
            f = queue.popleft()
            for p in gens:
                a, b = p[f[0]], p[f[1]]
                h = (a, b) if a < b else (b, a)
                if h not in orbit:
                    orbit[h] = next_id
                    queue.append(h)
        next_id += 1
    action = GroupAction(tuple(gens), elements, orbit)
    if full_orbits:
        short = {o: s for o, s in action.orbit_sizes.items() if s != action.order}
        if short:
            o, s = min(short.items())
            raise GroupError(f"orbit {o} has {s} edges but the group has order {action.order}")
    recoloured = ColouredGraph(n, edges, [orbit[e] for e in edges])
    return recoloured, action


def distance_colouring(n: int) -> ColouredGraph:
    """``K_n`` with edge ``{i, j}`` coloured ``min(|i - j|, n - |i - j|)``."""
    if n < 3:
        raise ValueError("distance colouring needs n >= 3")
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    colours = [min(j - i, n - (j - i)) for i, j in edges]
    return ColouredGraph(n, edges, colours)


# ----------------------------------------------------------------- results
@dataclass
class PackingResult:
    """Copies of ``H`` obtained by applying every group element to one rainbow copy."""

    copies: list[dict[int, int]]
    group: GroupAction
    base_copy: dict[int, int]
    host: ColouredGraph
    verdict: Verdict
    decomposition: bool = False
    transcript: Transcript | None = None

    def edge_sets(self, H: ColouredGraph) -> list[list[tuple[int, int]]]:
        return [copy_edges(H, c) for c in self.copies]

    def as_dict(self) -> dict[str, Any]:
        return {
            "copies": [{str(k): int(v) for k, v in sorted(c.items())} for c in self.copies],
            "base_copy": {str(k): int(v) for k, v in sorted(self.base_copy.items())},
            "group_order": self.group.order,
            "decomposition": self.decomposition,
            "verdict": self.verdict.as_dict(),
        }


@dataclass
class OdcResult:
    """Translates of a rainbow copy in ``K_{2^k}`` with multiplicity counts."""

    copies: list[dict[int, int]]
    base_copy: dict[int, int]
    host: ColouredGraph
    verdict: Verdict
    multiplicity: dict[int, int] = field(default_factory=dict)
    transcript: Transcript | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "copies": [{str(k): int(v) for k, v in sorted(c.items())} for c in self.copies],
            "base_copy": {str(k): int(v) for k, v in sorted(self.base_copy.items())},
            "multiplicity": {str(k): v for k, v in sorted(self.multiplicity.items())},
            "verdict": self.verdict.as_dict(),
        }


@dataclass
class HarmoniousResult:
    labelling: dict[int, int]
    group: AbelianGroup
    verdict: Verdict
    transcript: Transcript | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "labelling": {str(k): int(v) for k, v in sorted(self.labelling.items())},
            "group_order": self.group.order,
            "verdict": self.verdict.as_dict(),
        }


# ---------------------------------------------------------------- helpers
def _slack_gate(H: ColouredGraph, limit: float, what: str) -> None:
    if H.edge_count > limit + 1e-9:
        raise GateError(f"H has {H.edge_count} edges but {what} allows at most {limit:.2f}",
                        {"edges_H": H.edge_count, "limit": limit})


def _packing(H: ColouredGraph, host: ColouredGraph, action: GroupAction, base: dict[int, int],
             tr: Transcript | None) -> PackingResult:
    if not check_rainbow(host, base, H).ok:
        raise VerificationError("base copy is not rainbow under the orbit colouring")
    copies = [{x: int(p[v]) for x, v in base.items()} for p in action.elements]
    verdict = check_packing([copy_edges(H, c) for c in copies], host)
    if not verdict.ok:
        raise VerificationError(f"translates are not edge-disjoint: {verdict.as_dict()}")
    decomposition = action.order * H.edge_count == host.edge_count
    if decomposition and not verdict.coverage:
        raise VerificationError("copies should cover every host edge but do not")
    return PackingResult(copies, action, dict(base), host, verdict, decomposition, tr)


def cyclic_packing(H: ColouredGraph, n: int, cfg: PipelineConfig | None = None) -> PackingResult:
    """``n`` rotations of a rainbow copy of ``H`` in ``K_n``, pairwise edge-disjoint.

    For even ``n`` the antipodal edges ``{i, i + n/2}`` are removed first so
    that every rotation orbit has ``n`` edges.  ``H`` may have at most
    ``(1 - cfg.app_slack) n / 2`` edges.
    """
    cfg = cfg or PipelineConfig()
    if H.vertex_count > n:
        raise InstanceError(f"H has {H.vertex_count} vertices but K_n only {n}")
    _slack_gate(H, (1 - cfg.app_slack) * n / 2, "the cyclic packing slack")
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if not (n % 2 == 0 and j - i == n // 2)]
    host, action = orbit_colouring(ColouredGraph(n, edges), [rotation(n)], full_orbits=True)
    emb, tr = embed_quasirandom(host, H, cfg)
    return _packing(H, host, action, dict(emb.assignment), tr)


def bipartition(H: ColouredGraph) -> tuple[list[int], list[int]]:
    """A 2-colouring of ``H`` by breadth-first search; isolated vertices go left."""
    side = [-1] * H.vertex_count
    for s in range(H.vertex_count):
        if side[s] >= 0:
            continue
        side[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in H.neighbours(u):
                if side[w] < 0:
                    side[w] = 1 - side[u]
                    queue.append(w)
                elif side[w] == side[u]:
                    raise InstanceError("H is not bipartite")
    return [v for v in range(H.vertex_count) if side[v] == 0], [v for v in range(H.vertex_count) if side[v] == 1]


def bipartite_packing(H: ColouredGraph, n: int, cfg: PipelineConfig | None = None,
                      parts: tuple[Sequence[int], Sequence[int]] | None = None) -> PackingResult:
    """``n`` simultaneous rotations of a rainbow copy of ``H`` in ``K_{n,n}``.

    Host vertex ``l * n + i`` is ``(l, i)``; the group is generated by
    ``(l, i) -> (l, i + 1)``.  ``parts`` gives the two independent sides of
    ``H`` (computed by :func:`bipartition` when omitted); each must have at
    most ``n`` vertices and ``H`` at most ``(1 - cfg.app_slack) n`` edges.
    """
    cfg = cfg or PipelineConfig()
    left, right = (list(parts[0]), list(parts[1])) if parts is not None else bipartition(H)
    if len(left) > n or len(right) > n:
        raise InstanceError(f"the sides of H have {len(left)} and {len(right)} vertices; K_n,n allows {n}")
    _slack_gate(H, (1 - cfg.app_slack) * n, "the bipartite packing slack")
    edges = [(i, n + j) for i in range(n) for j in range(n)]
    gen = tuple(rotation(n)) + tuple(n + (i + 1) % n for i in range(n))
    host, action = orbit_colouring(ColouredGraph(2 * n, edges), [gen], full_orbits=True)
    if colouring_stats(host).local_max > 1:
        raise VerificationError("orbit colouring of K_n,n should be proper")
    # Pad H to 2n vertices: each side is completed with isolated vertices.
    hp = H.padded(H.vertex_count + 2 * n - len(left) - len(right))
    extra = list(range(H.vertex_count, hp.vertex_count))
    X0 = left + extra[: n - len(left)]
    X1 = right + extra[n - len(left):]
    inst = BlowUpInstance(hp, host, [X0, X1], [list(range(n)), list(range(n, 2 * n))],
                          eps=cfg.gate_eps, d=1.0, gamma=cfg.gamma)
    emb, tr = embed_rainbow(inst, cfg)
    base = {x: v for x, v in emb.assignment.items() if x < H.vertex_count}
    return _packing(H, host, action, base, tr)


def odc_cover(H: ColouredGraph, k: int, cfg: PipelineConfig | None = None) -> OdcResult:
    """Translates ``H_0 + z`` (``z`` in ``Z_2^k``) of a rainbow copy ``H_0`` in ``K_{2^k}``.

    ``K_{2^k}`` is coloured by ``c(ij) = i XOR j``.  The family is checked
    exactly: every edge lies in at most two copies and two copies share at
    most one edge.  ``multiplicity`` counts host edges by how many copies
    contain them.
    """
    cfg = cfg or PipelineConfig()
    if k < 1:
        raise ValueError("k must be at least 1")
    n = 2**k
    if H.vertex_count > n:
        raise InstanceError(f"H has {H.vertex_count} vertices but K_n only {n}")
    _slack_gate(H, max(1.0, (1 - cfg.app_slack) * n), "the double cover slack")
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    host = ColouredGraph(n, edges, [i ^ j for i, j in edges])
    if n == 2:
        # K_2 has one edge; any injective map is a rainbow copy.
        emb_map, tr = {x: x for x in range(H.vertex_count)}, None
    else:
        emb, tr = embed_quasirandom(host, H, cfg)
        emb_map = dict(emb.assignment)
    if not check_rainbow(host, emb_map, H).ok:
        raise VerificationError("base copy is not rainbow")
    copies = [{x: v ^ z for x, v in emb_map.items()} for z in range(n)]
    for c in copies:
        if not check_rainbow(host, c, H).ok:
            raise VerificationError("a translate of a rainbow copy is not rainbow")
    edge_sets = [copy_edges(H, c) for c in copies]
    verdict = check_odc(edge_sets, host)
    if not verdict.ok:
        raise VerificationError(f"translates violate the double cover conditions: {verdict.as_dict()}")
    count: dict[tuple[int, int], int] = {}
    for es in edge_sets:
        for u, v in es:
            e = (u, v) if u < v else (v, u)
            count[e] = count.get(e, 0) + 1
    mult = {0: host.edge_count - len(count)}
    for c in count.values():
        mult[c] = mult.get(c, 0) + 1
    return OdcResult(copies, emb_map, host, verdict, mult, tr)


def harmonious_labelling(H: ColouredGraph, group: AbelianGroup, cfg: PipelineConfig | None = None
                         ) -> HarmoniousResult:
    """Injective labels ``f: V(H) -> Gamma`` with distinct edge sums ``f(x) + f(y)``.

    The complete graph on the elements of ``Gamma`` is coloured by
    ``c(ij) = i + j``; a rainbow copy of ``H`` is exactly such a labelling.
    ``H`` may have at most ``(1 - cfg.app_slack) |Gamma|`` edges.
    """
    cfg = cfg or PipelineConfig()
    n = group.order
    if H.vertex_count > n:
        raise InstanceError(f"H has {H.vertex_count} vertices but the group only {n} elements")
    _slack_gate(H, max(1.0, (1 - cfg.app_slack) * n), "the labelling slack")
    if H.edge_count == 0:
        f = {x: x for x in range(H.vertex_count)}
        return HarmoniousResult(f, group, check_harmonious(H, f, group))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    sums = group.add(np.array([e[0] for e in edges]), np.array([e[1] for e in edges]))
    host = ColouredGraph(n, edges, [int(s) for s in sums])
    if n == 2:
        f, tr = {x: x for x in range(H.vertex_count)}, None
    else:
        emb, tr = embed_quasirandom(host, H, cfg)
        f = dict(emb.assignment)
    verdict = check_harmonious(H, f, group)
    if not verdict.ok:
        raise VerificationError(f"labelling is not harmonious: {verdict.as_dict()}")
    return HarmoniousResult(f, group, verdict, tr)

