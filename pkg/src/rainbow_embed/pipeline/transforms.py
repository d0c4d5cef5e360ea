"""Instance transforms that split colours and refine clusters.

Every probabilistic existence step becomes a seeded rejection-sampling loop:
draw, run the exact (or sampled) post-checks, and move to the next sub-seed
on failure.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..errors import InstanceError, RetriesExhausted, TransformError
from ..graphcore import BlowUpInstance, ColouredGraph, is_colour_split, partition_labels
from ..regularity import RegularityParams, regularity_gate

__all__ = [
    "split_host_colours",
    "pad_h_matchings",
    "colour_split_transform",
    "equitable_partition",
    "refine_instance",
    "TransformReport",
    "PaddingRecord",
]


# ------------------------------------------------------------------ layers
def split_host_colours(g: ColouredGraph, gamma: float, seed: int) -> tuple[ColouredGraph, ColouredGraph]:
    """Send every colour class to ``G_A`` with probability ``1 - gamma``, else to ``G_B``.

    Colour classes are decided in increasing id order from one seeded
    stream, so the split is deterministic per seed.  Every edge must carry
    exactly one colour.
    """
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    cols = g.edge_colours
    if any(len(cs) != 1 for cs in cols):
        raise ValueError("split_host_colours needs exactly one colour on every edge")
    rng = np.random.default_rng([seed, 0x5B])
    draws = rng.random(g.colour_bound)
    to_a = draws >= gamma
    colour = g.edge_colour_array
    ids = np.arange(g.edge_count)
    in_a = to_a[colour] if g.edge_count else np.zeros(0, dtype=bool)
    return g.edge_subgraph(ids[in_a]), g.edge_subgraph(ids[~in_a])


# ----------------------------------------------------------------- padding
@dataclass(frozen=True)
class PaddingRecord:
    """Edges added to ``H``; they are stripped before verification."""

    edges: tuple[tuple[int, int], ...] = ()

    def __bool__(self) -> bool:
        return bool(self.edges)

    def as_dict(self) -> dict:
        return {"padding_edges": [list(e) for e in self.edges]}


def _add_edges(h: ColouredGraph, new: Sequence[tuple[int, int]]) -> ColouredGraph:
    if not new:
        return h
    cols = list(h.edge_colours) + [()] * len(new)
    return ColouredGraph(h.vertex_count, h.edge_list() + list(new), cols, h.labels)


def pad_h_matchings(inst: BlowUpInstance, floor: int) -> tuple[BlowUpInstance, PaddingRecord]:
    """Add edges so every cluster pair carries at least ``floor`` H-edges.

    New edges join low-degree vertices first so the maximum degree grows as
    little as possible; they never join vertices of the same cluster.
    """
    h = inst.H
    adj = h.adjacency_matrix.copy()
    deg = h.degrees.astype(np.int64).copy()
    counts = inst.h_pair_counts.copy()
    added: list[tuple[int, int]] = []
    for i in range(inst.r):
        for j in range(i + 1, inst.r):
            need = floor - int(counts[i, j])
            xi = np.array(inst.X[i], dtype=np.int64)
            xj = np.array(inst.X[j], dtype=np.int64)
            while need > 0:
                free = ~adj[np.ix_(xi, xj)]
                if not free.any():
                    raise InstanceError(f"clusters {i} and {j} are too small to carry {floor} edges")
                cost = deg[xi][:, None] + deg[xj][None, :]
                cost = np.where(free, cost, np.iinfo(np.int64).max)
                a, b = np.unravel_index(int(np.argmin(cost)), cost.shape)
                u, v = int(xi[a]), int(xj[b])
                adj[u, v] = adj[v, u] = True
                deg[u] += 1
                deg[v] += 1
                added.append((min(u, v), max(u, v)))
                counts[i, j] += 1
                need -= 1
    if not added:
        return inst, PaddingRecord()
    h2 = _add_edges(h, added)
    return inst.replace(H=h2, Delta=max(inst.Delta, h2.max_degree)), PaddingRecord(tuple(sorted(added)))


# ------------------------------------------------------------ colour split
@dataclass
class TransformReport:
    """Diagnostics of a transform with its post-check outcomes."""

    name: str
    attempts: int = 0
    d_prime: float = 0.0
    stage_edges: dict[str, int] = field(default_factory=dict)
    colour_split: bool = False
    bounded: bool = False
    worst_ratio: float = 0.0
    regularity: str = "skipped"
    clause_failures: dict[str, int] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.colour_split and self.bounded and self.regularity != "failed"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "attempts": self.attempts,
            "d_prime": round(self.d_prime, 12),
            "stage_edges": dict(self.stage_edges),
            "colour_split": self.colour_split,
            "bounded": self.bounded,
            "worst_ratio": round(self.worst_ratio, 12),
            "regularity": self.regularity,
            "clause_failures": dict(sorted(self.clause_failures.items())),
            **self.extra,
        }


def _pair_index(r: int) -> np.ndarray:
    idx = np.full((r, r), -1, dtype=np.int64)
    k = 0
    for i in range(r):
        for j in range(i + 1, r):
            idx[i, j] = idx[j, i] = k
            k += 1
    return idx


def _pair_bound_ratio(g: ColouredGraph, lab: np.ndarray, eh: np.ndarray, gamma: float) -> float:
    """Worst ``e^a(V_i,V_j) / ((1 - gamma/2) e_G(V_i,V_j) / e_H(X_i,X_j))`` over pairs and colours.

    Pairs without H-edges are unconstrained.  Values ``<= 1`` mean bounded.
    """
    if not g.edge_count:
        return 0.0
    r = eh.shape[0]
    pid = _pair_index(r)
    a, b = lab[g.edges[:, 0]], lab[g.edges[:, 1]]
    cross = a != b
    p = pid[a[cross], b[cross]]
    col = g.edge_colour_array[cross]
    npairs = r * (r - 1) // 2
    e_pair = np.bincount(p, minlength=npairs)
    key = col * npairs + p
    uk, cnt = np.unique(key, return_counts=True)
    pk = uk % npairs
    ehp = np.zeros(npairs)
    for i in range(r):
        for j in range(i + 1, r):
            ehp[pid[i, j]] = eh[i, j]
    worst = 0.0
    has_h = ehp[pk] > 0
    if has_h.any():
        bound = (1 - gamma / 2) * e_pair[pk[has_h]] / ehp[pk[has_h]]
        worst = float(np.max(cnt[has_h] / bound))
    return worst


def _regularity_status(g: ColouredGraph, parts, d: float, eps: float, sample_count: int, seed: int,
                       pairs=None) -> str:
    params = RegularityParams(eps=eps, d=d, sample_count=sample_count, rng_seed=seed)
    status = "skipped"
    r = len(parts)
    for i in range(r):
        for j in range(i + 1, r):
            if pairs is not None and (i, j) not in pairs:
                continue
            verdict = regularity_gate(g, parts[i], parts[j], params)
            if verdict is None:
                continue
            if not verdict.passed:
                return "failed"
            status = "passed"
    return status


def colour_split_transform(
    inst: BlowUpInstance,
    seed: int,
    *,
    retries: int = 50,
    d_prime: float | None = None,
    eps_check: float | None = None,
    sample_count: int = 20,
) -> tuple[ColouredGraph, TransformReport]:
    """Three-stage seeded subsampling making the colouring colour-split.

    Stage 1 keeps each edge of ``G[V_i, V_j]`` with probability
    ``p_ij = e_H(X_i,X_j) / (2 Delta n)``.  Stage 2 sends each colour to one
    pair ``tau(a)`` drawn from ``q^a`` and keeps an edge of pair ``ij`` iff
    ``tau(c(e)) = ij`` and a ``gamma^2 / q^a_ij`` coin succeeds, so every
    stage-1 edge survives with probability exactly ``gamma^2``.  Stage 3
    thins pair ``ij`` with probability ``d' / (gamma^2 p_ij d_ij)``, where
    ``d_ij`` is the measured density of the pair and ``d'`` defaults to the
    smallest ``gamma^2 p_ij d_ij``.

    Post-checks: colour-split and per-pair
    ``(1 - gamma/2) e_G'(V_i,V_j) / e_H(X_i,X_j)``-boundedness exactly, and
    sampled super-regularity when the clusters are large enough.  Edges
    inside a cluster are dropped.
    """
    r, gamma = inst.r, inst.gamma
    n = inst.n
    delta = max(1, int(inst.Delta))
    npairs = r * (r - 1) // 2
    if r < 2:
        raise TransformError("precondition", "colour splitting needs at least two clusters")
    if npairs * gamma**2 >= 1:
        raise TransformError("precondition", f"C(r,2) gamma^2 = {npairs * gamma**2:.3g} must be below 1")
    eh = inst.h_pair_counts
    floor = gamma**2 * n
    low = [(i, j) for i in range(r) for j in range(i + 1, r) if eh[i, j] < floor - 1e-9]
    if low:
        i, j = low[0]
        raise TransformError("precondition",
                             f"e_H(X_{i}, X_{j}) = {eh[i, j]} is below gamma^2 n = {floor:.3g}; pad H first")
    g = inst.G
    if any(len(cs) != 1 for cs in g.edge_colours):
        raise TransformError("precondition", "every host edge needs exactly one colour")

    lab = inst.g_cluster
    pid = _pair_index(r)
    a, b = lab[g.edges[:, 0]], lab[g.edges[:, 1]]
    cross_ids = np.flatnonzero(a != b)
    pe = pid[a[cross_ids], b[cross_ids]]
    col = g.edge_colour_array[cross_ids]
    ncol = g.colour_bound
    sizes = np.array(inst.cluster_sizes, dtype=np.float64)
    p_pair = np.zeros(npairs)
    dens = np.zeros(npairs)
    e_g = np.bincount(pe, minlength=npairs)
    for i in range(r):
        for j in range(i + 1, r):
            k = pid[i, j]
            p_pair[k] = min(1.0, eh[i, j] / (2 * delta * n))
            dens[k] = e_g[k] / (sizes[i] * sizes[j])
    if d_prime is None:
        d_prime = float(np.min(gamma**2 * p_pair * dens))
    eps_check = inst.eps if eps_check is None else eps_check

    report = TransformReport("colour_split", d_prime=d_prime)
    for attempt in range(retries):
        report.attempts = attempt + 1
        rng = np.random.default_rng([seed, attempt, 0x5C])
        keep1 = rng.random(len(cross_ids)) < p_pair[pe]
        counts = np.zeros((ncol, npairs), dtype=np.int64)
        np.add.at(counts, (col[keep1], pe[keep1]), 1)
        tot = counts.sum(axis=1)
        heavy = counts > (gamma**2 * tot / (1 - npairs * gamma**2))[:, None]
        q = np.full((ncol, npairs), gamma**2)
        light_mass = 1 - (npairs - heavy.sum(axis=1)) * gamma**2
        heavy_sum = np.where(heavy, counts, 0).sum(axis=1)
        for c in np.flatnonzero(tot):
            if heavy_sum[c] > 0:
                q[c, heavy[c]] = light_mass[c] * counts[c, heavy[c]] / heavy_sum[c]
            else:
                # No heavy pair: spread the remaining mass proportionally.
                q[c] += (1 - npairs * gamma**2) * counts[c] / tot[c]
        q[tot == 0] = 1.0 / npairs
        cum = np.cumsum(q, axis=1)
        u = rng.random(ncol) * cum[:, -1]
        tau = np.minimum((cum < u[:, None]).sum(axis=1), npairs - 1)
        coin = rng.random(len(cross_ids))
        keep2 = keep1 & (tau[col] == pe) & (coin < np.minimum(1.0, gamma**2 / q[col, pe]))
        thin = d_prime / np.maximum(gamma**2 * p_pair * dens, 1e-300)
        keep3 = keep2 & (rng.random(len(cross_ids)) < np.minimum(1.0, thin[pe]))
        report.stage_edges = {"input": int(len(cross_ids)), "stage1": int(keep1.sum()),
                              "stage2": int(keep2.sum()), "stage3": int(keep3.sum())}
        gp = g.edge_subgraph(cross_ids[keep3])
        report.colour_split = is_colour_split(gp, inst.V)
        report.worst_ratio = _pair_bound_ratio(gp, lab, eh, gamma)
        report.bounded = report.worst_ratio <= 1 + 1e-12
        report.regularity = "skipped"
        if report.colour_split and report.bounded:
            report.regularity = _regularity_status(gp, inst.V, d_prime, eps_check, sample_count,
                                                   seed * 1000 + attempt)
        if report.passed:
            return gp, report
        for clause, ok in (("colour-split", report.colour_split), ("boundedness", report.bounded),
                           ("regularity", report.regularity != "failed")):
            if not ok:
                report.clause_failures[clause] = report.clause_failures.get(clause, 0) + 1
    worst = max(report.clause_failures, key=report.clause_failures.get, default="unknown")
    raise TransformError(worst, f"colour splitting failed on all {retries} seeds", report.as_dict())


# ------------------------------------------------------ equitable partition
def _balanced_greedy(adj: list[set[int]], k: int, order: np.ndarray) -> list[int] | None:
    colour = [-1] * len(adj)
    sizes = [0] * k
    for v in order.tolist():
        banned = {colour[u] for u in adj[v] if colour[u] >= 0}
        options = [c for c in range(k) if c not in banned]
        if not options:
            return None
        c = min(options, key=lambda c: (sizes[c], c))
        colour[v] = c
        sizes[c] += 1
    return colour


def _rebalance(adj: list[set[int]], colour: list[int], k: int, rng: np.random.Generator,
               max_moves: int) -> bool:
    """Move vertices along accessibility paths until class sizes differ by <= 1."""
    n = len(colour)
    classes = [set() for _ in range(k)]
    for v, c in enumerate(colour):
        classes[c].add(v)
    for _ in range(max_moves):
        sizes = [len(s) for s in classes]
        big, small = max(sizes), min(sizes)
        if big - small <= 1:
            return True
        sources = [c for c in range(k) if sizes[c] == big]
        targets = {c for c in range(k) if sizes[c] <= big - 2}
        # BFS over classes: an arc A -> B exists when some vertex of A has
        # no neighbour in B and so may move there.
        parent: dict[int, tuple[int, int]] = {}
        seen = set(sources)
        queue = deque(sources)
        hit = None
        while queue and hit is None:
            c = queue.popleft()
            members = sorted(classes[c])
            for d in rng.permutation(k).tolist():
                if d in seen:
                    continue
                mover = next((v for v in members if not any(colour[u] == d for u in adj[v])), None)
                if mover is None:
                    continue
                parent[d] = (c, mover)
                seen.add(d)
                if d in targets:
                    hit = d
                    break
                queue.append(d)
        if hit is None:
            return False
        # Apply moves backwards along the path so each move stays legal.
        path = []
        d = hit
        while d in parent:
            c, v = parent[d]
            path.append((v, c, d))
            d = c
        for v, c, d in path:
            classes[c].discard(v)
            classes[d].add(v)
            colour[v] = d
    sizes = [len(s) for s in classes]
    return max(sizes) - min(sizes) <= 1 if n else True


def equitable_partition(h: ColouredGraph, k: int, *, seed: int = 0, restarts: int = 50) -> list[list[int]]:
    """Partition ``V(h)`` into ``k`` independent sets whose sizes differ by at most one.

    Balanced greedy colouring followed by moves along accessibility paths;
    a randomized restart is taken when no improving path exists.
    """
    n = h.vertex_count
    if not (h.max_degree < k <= max(n, 1)) or k < 1:
        raise InstanceError(f"equitable_partition needs Delta(h) = {h.max_degree} < k = {k} <= |V(h)| = {n}")
    adj = [set(h.neighbours(v)) for v in range(n)]
    for attempt in range(restarts):
        rng = np.random.default_rng([seed, attempt, 0xE9])
        order = np.arange(n) if attempt == 0 else rng.permutation(n)
        colour = _balanced_greedy(adj, k, order)
        if colour is None:
            continue
        if _rebalance(adj, colour, k, rng, max_moves=4 * n + 10):
            parts = [[] for _ in range(k)]
            for v, c in enumerate(colour):
                parts[c].append(v)
            parts.sort(key=lambda p: (-len(p), p))
            return parts
    raise RetriesExhausted("equitable_partition", f"no equitable {k}-colouring found in {restarts} restarts")


# --------------------------------------------------------------- refinement
def _square_on(h: ColouredGraph, verts: Sequence[int]) -> ColouredGraph:
    """``H^2`` induced on ``verts``, relabelled to ``0 .. len(verts) - 1``."""
    pos = {v: i for i, v in enumerate(verts)}
    edges = set()
    for v in verts:
        reach = set(h.neighbours(v))
        for u in list(reach):
            reach.update(h.neighbours(u))
        for w in reach:
            if w != v and w in pos:
                a, b = pos[v], pos[w]
                edges.add((min(a, b), max(a, b)))
    return ColouredGraph(len(verts), sorted(edges))


def refine_instance(
    inst: BlowUpInstance,
    seed: int,
    *,
    strict: bool = True,
    retries: int = 20,
    floor: int | None = None,
    d_prime: float | None = None,
    eps_check: float | None = None,
    sample_count: int = 20,
) -> tuple[BlowUpInstance, PaddingRecord, TransformReport]:
    """Refine a colour-split instance so every H-pair becomes a matching.

    Each ``X_i`` is split into ``Delta^2`` classes independent in ``H^2``;
    each ``V_i`` is split uniformly at random into classes of matching
    sizes.  ``H`` is padded to ``H'`` so every refined pair (including two
    classes of one cluster) is a matching with at least ``floor`` edges
    (default ``max(1, ceil(gamma^4 n / Delta^2))``).  Every colour of an
    original pair picks one refined pair with probability proportional to
    its share of ``H'``-edges, edges are thinned to density ``d'`` and the
    empty same-cluster pairs receive random edges of density ``d'`` with
    fresh rainbow colours.

    Exact post-checks: refined pairs of ``H'`` are matchings, the colouring
    is colour-split and per-pair bounded.  Sampled regularity runs when
    classes are large enough.  With ``strict=False`` the last attempt is
    returned with the failed checks recorded instead of raising.
    """
    if not is_colour_split(inst.G, inst.V):
        raise TransformError("precondition", "refinement needs a colour-split host colouring")
    if any(len(cs) != 1 for cs in inst.G.edge_colours):
        raise TransformError("precondition", "every host edge needs exactly one colour")
    h, g, gamma = inst.H, inst.G, inst.gamma
    delta = max(1, int(inst.Delta))
    k = delta * delta
    if min(inst.cluster_sizes) < k:
        raise InstanceError(f"every cluster needs at least Delta^2 = {k} vertices")

    # 2-independent classes of every X_i.
    x_classes: list[list[int]] = []
    owner: list[int] = []
    for i, xi in enumerate(inst.X):
        sq = _square_on(h, xi)
        kk = k if sq.max_degree < k else sq.max_degree + 1
        for part in equitable_partition(sq, kk, seed=seed + i):
            x_classes.append(sorted(xi[p] for p in part))
            owner.append(i)
    R = len(x_classes)
    n_ref = inst.n / k
    if floor is None:
        floor = max(1, math.ceil(gamma**4 * n_ref - 1e-9))
    floor = min(floor, min(len(c) for c in x_classes))

    # Pad H so every refined pair is a matching of size >= floor.
    hlab = partition_labels(h.vertex_count, x_classes)
    adj = [set(h.neighbours(v)) for v in range(h.vertex_count)]
    pair_count = np.zeros((R, R), dtype=np.int64)
    for u, v in h.edge_list():
        a, b = hlab[u], hlab[v]
        pair_count[a, b] += 1
        pair_count[b, a] += 1
    added: list[tuple[int, int]] = []
    for a in range(R):
        for b in range(a + 1, R):
            need = floor - int(pair_count[a, b])
            if need <= 0:
                continue
            fa = [x for x in x_classes[a] if not any(hlab[y] == b for y in adj[x])]
            fb = [y for y in x_classes[b] if not any(hlab[x] == a for x in adj[y])]
            for x, y in zip(fa[:need], fb[:need]):
                adj[x].add(y)
                adj[y].add(x)
                added.append((min(x, y), max(x, y)))
                pair_count[a, b] += 1
                pair_count[b, a] += 1
    h2 = _add_edges(h, added)
    padding = PaddingRecord(tuple(sorted(added)))

    glab_orig = inst.g_cluster
    colours = g.edge_colour_array
    ge = g.edges
    labels = list(g.labels) if g.labels is not None else list(range(g.colour_bound))
    eh_orig = np.zeros((inst.r, inst.r), dtype=np.int64)
    for a in range(R):
        for b in range(R):
            if owner[a] != owner[b]:
                eh_orig[owner[a], owner[b]] += pair_count[a, b]
    dens_orig = inst.g_pair_counts / np.maximum(
        np.outer(inst.cluster_sizes, inst.cluster_sizes), 1)
    prob = np.zeros((R, R))
    for a in range(R):
        for b in range(R):
            i, j = owner[a], owner[b]
            if i != j and eh_orig[i, j]:
                prob[a, b] = pair_count[a, b] / eh_orig[i, j]
    cross_targets = [prob[a, b] * dens_orig[owner[a], owner[b]]
                     for a in range(R) for b in range(a + 1, R) if owner[a] != owner[b] and prob[a, b] > 0]
    if d_prime is None:
        d_prime = float(min(cross_targets)) if cross_targets else 0.5
    eps_check = inst.eps if eps_check is None else eps_check

    report = TransformReport("refine", d_prime=d_prime)
    report.extra["classes"] = [len(c) for c in x_classes]
    report.extra["padding_edges"] = len(added)
    report.extra["floor"] = floor
    result = None
    for attempt in range(retries):
        report.attempts = attempt + 1
        rng = np.random.default_rng([seed, attempt, 0x4E])
        v_classes: list[list[int]] = []
        cls_of_x = [[a for a in range(R) if owner[a] == i] for i in range(inst.r)]
        for i, vi in enumerate(inst.V):
            perm = rng.permutation(np.array(vi))
            start = 0
            for a in cls_of_x[i]:
                size = len(x_classes[a])
                v_classes.append(sorted(int(v) for v in perm[start:start + size]))
                start += size
        glab = partition_labels(g.vertex_count, v_classes)

        # tau: every colour of an original pair picks one refined pair.
        keep = np.zeros(g.edge_count, dtype=bool)
        ca, cb = glab[ge[:, 0]], glab[ge[:, 1]]
        oa, ob = glab_orig[ge[:, 0]], glab_orig[ge[:, 1]]
        chosen: dict[tuple[int, int, int], tuple[int, int]] = {}
        for c in sorted(set(colours.tolist())):
            eids = g.colour_index[c]
            i, j = int(oa[eids[0]]), int(ob[eids[0]])
            if i == j:
                continue
            i, j = min(i, j), max(i, j)
            options = [(a, b) for a in cls_of_x[i] for b in cls_of_x[j]]
            w = np.array([prob[a, b] for a, b in options])
            if w.sum() <= 0:
                continue
            pick = options[int(rng.choice(len(options), p=w / w.sum()))]
            chosen[(c, i, j)] = pick
            for e in eids:
                a, b = int(ca[e]), int(cb[e])
                if {a, b} == set(pick):
                    pe = prob[a, b] * dens_orig[i, j]
                    keep[e] = rng.random() < min(1.0, d_prime / pe) if pe > 0 else False
        kept = np.flatnonzero(keep)
        new_edges = [tuple(int(x) for x in ge[e]) for e in kept]
        new_cols = [int(colours[e]) for e in kept]
        next_colour = g.colour_bound
        art_labels: list[Any] = []
        for i in range(inst.r):
            for x in range(len(cls_of_x[i])):
                for y in range(x + 1, len(cls_of_x[i])):
                    A, B = v_classes[cls_of_x[i][x]], v_classes[cls_of_x[i][y]]
                    mask = rng.random((len(A), len(B))) < d_prime
                    for s, t in zip(*np.nonzero(mask)):
                        new_edges.append((A[s], B[t]))
                        new_cols.append(next_colour)
                        art_labels.append(f"art:{next_colour - g.colour_bound}")
                        next_colour += 1
        gp = ColouredGraph(g.vertex_count, new_edges, new_cols, labels + art_labels)

        matchings_ok = all(
            sum(1 for y in adj[x] if hlab[y] == b) <= 1
            for a in range(R) for x in x_classes[a] for b in range(R))
        eh_ref = pair_count
        report.colour_split = is_colour_split(gp, v_classes)
        report.worst_ratio = _pair_bound_ratio(gp, glab, eh_ref, gamma)
        report.bounded = report.worst_ratio <= 1 + 1e-12
        report.extra["matchings"] = matchings_ok
        report.extra["artificial_edges"] = len(art_labels)
        report.stage_edges = {"input": g.edge_count, "kept": int(len(kept)), "artificial": len(art_labels)}
        report.regularity = "skipped"
        if report.colour_split and report.bounded and matchings_ok:
            report.regularity = _regularity_status(gp, v_classes, d_prime, eps_check, sample_count,
                                                   seed * 1000 + attempt)
        refined = BlowUpInstance(h2, gp, x_classes, v_classes, eps=inst.eps, d=d_prime,
                                 Delta=max(1, h2.max_degree), Lambda=None, gamma=gamma)
        result = (refined, padding, report)
        if report.passed and matchings_ok:
            return result
        for clause, ok in (("colour-split", report.colour_split), ("boundedness", report.bounded),
                           ("matchings", matchings_ok), ("regularity", report.regularity != "failed")):
            if not ok:
                report.clause_failures[clause] = report.clause_failures.get(clause, 0) + 1
    if not strict and result is not None:
        return result
    worst = max(report.clause_failures, key=report.clause_failures.get, default="unknown")
    raise TransformError(worst, f"refinement failed on all {retries} seeds", report.as_dict())
