"""Completion: extend a partial rainbow embedding to a total one.

Leftover vertices of every cluster, together with a seeded sample of
already-embedded vertices (which are un-embedded), form reservoirs
``X_i'`` and ``V_i'`` of equal size.  The reservoir vertices are then
re-embedded by a constraint search: candidate images must be adjacent to
the images of all fixed H-neighbours, every consumed colour must be new,
and colours are pairwise distinct.  The search is random-greedy with
minimum-remaining-values ordering, forward checking, a one-step switching
repair and bounded backtracking; failures trigger a full restart with a
larger reservoir.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import RetriesExhausted
from ..graphcore import ColouredGraph
from ..regularity import RegularityParams, regularity_gate
from .rounds import EngineState

__all__ = ["CompletionState", "CompletionReport", "complete_embedding"]


@dataclass
class CompletionState:
    """Layers and reservoirs of one completion attempt, with their candidacy graphs."""

    G_A: ColouredGraph
    G_B: ColouredGraph
    B_candidacy: dict
    mirror: dict[int, int]
    reservoirs: dict[int, tuple[list[int], list[int]]] = field(default_factory=dict)
    hit_edges: dict[tuple[int, int], int] = field(default_factory=dict)


@dataclass
class CompletionReport:
    layer: str = "strict"
    restarts: int = 0
    reservoir_size: dict[int, int] = field(default_factory=dict)
    leftovers: dict[int, int] = field(default_factory=dict)
    checks: dict[str, Any] = field(default_factory=dict)
    nodes: int = 0
    switches: int = 0
    backtracks: int = 0
    attempts: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "layer": self.layer, "restarts": self.restarts,
            "reservoir_size": {str(k): v for k, v in self.reservoir_size.items()},
            "leftovers": {str(k): v for k, v in self.leftovers.items()},
            "checks": self.checks, "nodes": self.nodes, "switches": self.switches,
            "backtracks": self.backtracks, "attempts": self.attempts,
        }


class _Budget(Exception):
    pass


class _Search:
    """Backtracking search over the reservoir variables of one attempt.

    Live domains map a candidate image to the colours it would consume and
    are maintained incrementally: placing ``x`` at ``v`` removes ``v`` and
    every candidate clashing with the new colours from the other domains,
    and recomputes the domains of the H-neighbours of ``x``.
    """

    def __init__(self, state: EngineState, phi: np.ndarray, variables: list[int], free_host: dict[int, set[int]],
                 adj: np.ndarray, col: np.ndarray, used0: set[int], rng: np.random.Generator, budget: int):
        self.h = state.inst.H
        self.cluster = state.inst.h_cluster
        self.phi = phi
        self.adj, self.col = adj, col
        self.used = set(used0)
        self.rng = rng
        self.budget = budget
        self.nodes = self.switches = self.backtracks = 0
        self.vars = variables
        self.var_set = set(variables)
        self.taken: set[int] = set()
        self.nbrs = {x: [y for y in self.h.neighbours(x) if y in self.var_set] for x in variables}
        # Static domains: adjacency and colours towards fixed neighbours.
        self.static: dict[int, dict[int, tuple[int, ...]]] = {}
        for x in variables:
            fixed = [int(phi[y]) for y in self.h.neighbours(x) if y not in self.var_set]
            dom: dict[int, tuple[int, ...]] = {}
            for v in sorted(free_host[int(self.cluster[x])]):
                if fixed and not adj[fixed, v].all():
                    continue
                cs = tuple(int(col[u, v]) for u in fixed)
                if len(set(cs)) != len(cs) or any(c in self.used for c in cs):
                    continue
                dom[v] = cs
            self.static[x] = dom
        self.domains: dict[int, dict[int, tuple[int, ...]]] = {}
        self._refresh_all()

    # -------------------------------------------------------------- helpers
    def _cost(self, x: int, v: int) -> tuple[int, ...] | None:
        """Colours consumed by placing ``x`` at ``v`` now, or ``None`` if illegal."""
        if v in self.taken:
            return None
        cs = list(self.static[x][v])
        for y in self.nbrs[x]:
            if self.phi[y] >= 0:
                u = int(self.phi[y])
                if not self.adj[u, v]:
                    return None
                cs.append(int(self.col[u, v]))
        if len(set(cs)) != len(cs) or any(c in self.used for c in cs):
            return None
        return tuple(cs)

    def _full(self, x: int) -> dict[int, tuple[int, ...]]:
        out = {}
        for v in self.static[x]:
            cs = self._cost(x, v)
            if cs is not None:
                out[v] = cs
        return out

    def _refresh_all(self) -> None:
        self.domains = {x: self._full(x) for x in self.vars if self.phi[x] < 0}

    def _place(self, x: int, v: int, cs: tuple[int, ...]) -> None:
        self.phi[x] = v
        self.taken.add(v)
        self.used.update(cs)

    def _remove(self, x: int, cs: tuple[int, ...]) -> None:
        self.taken.discard(int(self.phi[x]))
        self.phi[x] = -1
        self.used.difference_update(cs)

    def _assign(self, x: int, v: int, cs: tuple[int, ...]) -> dict[int, dict[int, tuple[int, ...]]]:
        """Place ``x`` and prune the other domains; returns what to restore."""
        self._place(x, v, cs)
        saved = {x: self.domains.pop(x)}
        cset = set(cs)
        nb = set(self.nbrs[x])
        for y, dom in self.domains.items():
            if y in nb:
                saved[y] = dom
                self.domains[y] = self._full(y)
            elif v in dom or (cset and any(cset.intersection(c) for c in dom.values())):
                saved[y] = dom
                self.domains[y] = {w: c for w, c in dom.items() if w != v and not cset.intersection(c)}
        return saved

    def _unassign(self, x: int, cs: tuple[int, ...], saved: dict[int, dict[int, tuple[int, ...]]]) -> None:
        self._remove(x, cs)
        self.domains.update(saved)

    def _switch(self, x: int, placed: dict[int, tuple[int, ...]]) -> tuple[int, tuple[int, ...]] | None:
        """Move one placed same-cluster variable to free a slot for ``x``.

        On success the domains are rebuilt from scratch; the caller must
        treat the switch as irreversible and rebuild again on backtrack.
        """
        cl = int(self.cluster[x])
        for w in list(placed):
            if int(self.cluster[w]) != cl:
                continue
            v = int(self.phi[w])
            if v not in self.static[x]:
                continue
            cw = placed[w]
            self._remove(w, cw)
            cx = self._cost(x, v)
            if cx is not None:
                self._place(x, v, cx)
                for v2 in self.static[w]:
                    c2 = self._cost(w, v2)
                    if c2 is not None:
                        self._place(w, v2, c2)
                        placed[w] = c2
                        self.switches += 1
                        return v, cx
                self._remove(x, cx)
            self._place(w, v, cw)
        return None

    # --------------------------------------------------------------- search
    def run(self) -> bool:
        placed: dict[int, tuple[int, ...]] = {}
        try:
            return self._dfs(placed)
        except _Budget:
            return False

    def _dfs(self, placed: dict[int, tuple[int, ...]]) -> bool:
        self.nodes += 1
        if self.nodes > self.budget:
            raise _Budget
        if not self.domains:
            return True
        x = min(self.domains, key=lambda y: (len(self.domains[y]), y))
        dom = self.domains[x]
        if not dom:
            sw = self._switch(x, placed)
            if sw is None:
                self.backtracks += 1
                return False
            placed[x] = sw[1]
            self._refresh_all()
            if self._dfs(placed):
                return True
            self._remove(x, placed.pop(x))
            self._refresh_all()
            self.backtracks += 1
            return False
        items = list(dom.items())
        for k in self.rng.permutation(len(items)).tolist():
            v, cs = items[k]
            if v in self.taken or self._cost(x, v) != cs:
                # Stale after a switch deeper in the tree.
                continue
            saved = self._assign(x, v, cs)
            placed[x] = cs
            if self._dfs(placed):
                return True
            # A switch below may have changed the colours recorded for x.
            self._unassign(x, placed.pop(x), saved)
        self.backtracks += 1
        return False


def _bipartite(mask: np.ndarray) -> ColouredGraph:
    """Uncoloured bipartite graph on ``rows + cols`` vertices with adjacency ``mask``."""
    ii, jj = np.nonzero(mask)
    return ColouredGraph(mask.shape[0] + mask.shape[1], np.stack([ii, jj + mask.shape[0]], axis=1))


def _advisory_checks(state: EngineState, reservoirs: dict[int, tuple[list[int], list[int]]], n_b: int,
                     mu: float, seed: int, eps: float) -> dict[str, Any]:
    """Checks (a)-(e) on the reservoirs; reported, not enforced."""
    gb = state.GB
    adj = gb.adjacency_matrix
    col = gb.colour_matrix
    r = state.inst.r
    bound = mu ** 1.5 * state.inst.n
    out: dict[str, Any] = {"a_gb_pairs": True, "b_b_reservoir": True, "c_reservoir_bounded": True,
                           "d_hit_bounded": True, "e_sizes": True}
    for i in range(r):
        xi, vi = reservoirs[i]
        if len(xi) != len(vi) or len(xi) < n_b:
            out["e_sizes"] = False
        if len(vi) >= 2:
            b = state.B[i]
            rows = [int(np.flatnonzero(b.left == x)[0]) for x in xi]
            cols = [int(np.flatnonzero(b.right == v)[0]) for v in vi]
            sub = b.mask[np.ix_(rows, cols)]
            dens = float(sub.mean()) if sub.size else 0.0
            if dens > 0:
                v = regularity_gate(_bipartite(sub), range(len(rows)), range(len(rows), len(rows) + len(cols)),
                                    RegularityParams(eps=eps, d=dens, sample_count=8, rng_seed=seed))
                if v is not None and not v.passed:
                    out["b_b_reservoir"] = False
        for j in range(r):
            if j <= i:
                continue
            vj = reservoirs[j][1]
            if not vi or not vj:
                continue
            block = adj[np.ix_(vi, vj)]
            dens = float(block.mean())
            if dens > 0:
                v = regularity_gate(gb, vi, vj, RegularityParams(eps=eps, d=dens, sample_count=8, rng_seed=seed))
                if v is not None and not v.passed:
                    out["a_gb_pairs"] = False
            cb = col[np.ix_(vi, vj)][block]
            if cb.size and np.unique(cb, return_counts=True)[1].max() > bound:
                out["c_reservoir_bounded"] = False
    # G_B^hit: G_B edges from fixed images to reservoir vertices of other clusters.
    fixed_mask = np.zeros(gb.vertex_count, dtype=bool)
    for i in range(r):
        fixed_mask[state.V[i]] = True
        fixed_mask[reservoirs[i][1]] = False
    res_all = np.concatenate([np.asarray(reservoirs[i][1], dtype=np.int64) for i in range(r)]) if r else []
    hit = adj[np.ix_(np.flatnonzero(fixed_mask), res_all)] if len(res_all) else np.zeros((0, 0), bool)
    hc = col[np.ix_(np.flatnonzero(fixed_mask), res_all)][hit] if hit.size else np.zeros(0, np.int64)
    if hc.size and np.unique(hc, return_counts=True)[1].max() > bound:
        out["d_hit_bounded"] = False
    out["hit_edges"] = int(hit.sum()) if hit.size else 0
    return out


def complete_embedding(state: EngineState, *, mu: float, seed: int, restarts: int = 6,
                       search_nodes: int = 20_000, layer_policy: str = "auto", eps: float = 0.5
                       ) -> tuple[np.ndarray, CompletionReport]:
    """Extend ``state.phi`` to a total embedding, returning ``(phi, report)``.

    ``layer_policy`` selects the host edges and colours the completion may
    use: ``"strict"`` uses only the ``G_B`` layer, ``"relaxed"`` any host
    edge whose colour is still unused, and ``"auto"`` tries strict first
    and falls back to relaxed.  Raises :class:`RetriesExhausted`.
    """
    inst = state.inst
    n = inst.n
    r = inst.r
    layers = {"strict": ["strict"], "relaxed": ["relaxed"], "auto": ["strict", "relaxed"]}[layer_policy]
    report = CompletionReport()
    leftovers = {i: [int(x) for x in state.X[i] if state.phi[x] < 0] for i in range(r)}
    report.leftovers = {i: len(v) for i, v in leftovers.items()}
    e = inst.H.edges
    total = 0
    for layer in layers:
        report.layer = layer
        if layer == "strict":
            adj, col = state.GB.adjacency_matrix, state.GB.colour_matrix
        else:
            adj, col = inst.G.adjacency_matrix, inst.G.colour_matrix
        # Under "auto" the strict layer is a quick first try before the fallback.
        quick = layer_policy == "auto" and layer == "strict"
        tries = min(restarts, 3) if quick else restarts
        nodes = max(1, search_nodes // 10) if quick else search_nodes
        for k in range(tries):
            rng = np.random.default_rng([seed, k, 0xC0, len(layer)])
            phi = state.phi.copy()
            reservoirs: dict[int, tuple[list[int], list[int]]] = {}
            for i in range(r):
                size_i = len(state.X[i])
                n_b = min(size_i, max(math.ceil(mu * (2 ** k) * n), len(leftovers[i])))
                embedded = [int(x) for x in state.X[i] if phi[x] >= 0]
                extra = rng.permutation(embedded)[: n_b - len(leftovers[i])].tolist() if embedded else []
                xs = leftovers[i] + [int(x) for x in extra]
                for x in extra:
                    phi[x] = -1
                taken = {int(phi[x]) for x in state.X[i] if phi[x] >= 0}
                vs = [int(v) for v in state.V[i] if int(v) not in taken]
                reservoirs[i] = (xs, vs)
                report.reservoir_size[i] = len(xs)
            if k == 0:
                n_b0 = min(report.reservoir_size.values()) if r else 0
                report.checks = _advisory_checks(state, reservoirs, n_b0, mu, seed, eps)
            emb = (phi[e[:, 0]] >= 0) & (phi[e[:, 1]] >= 0) if len(e) else np.zeros(0, bool)
            used0 = {int(c) for c in inst.G.colour_matrix[phi[e[emb, 0]], phi[e[emb, 1]]]} if len(e) else set()
            deg = inst.H.degrees
            variables = [x for i in range(r) for x in reservoirs[i][0] if deg[x] > 0]
            free = {i: set(reservoirs[i][1]) for i in range(r)}
            # Pigeonhole: every missing edge needs its own unused colour of the layer.
            missing = int((~emb).sum()) if len(e) else 0
            palette = {int(c) for c in np.unique(col[adj])} - used0 if missing else set()
            if missing > len(palette):
                report.attempts.append({"layer": layer, "restart": k, "variables": len(variables),
                                        "nodes": 0, "success": False, "pigeonhole": True})
                total += 1
                continue
            search = _Search(state, phi, variables, free, adj, col, used0, rng, nodes)
            ok = search.run()
            report.nodes += search.nodes
            report.switches += search.switches
            report.backtracks += search.backtracks
            report.attempts.append({"layer": layer, "restart": k, "variables": len(variables),
                                    "nodes": search.nodes, "success": ok})
            total += 1
            if ok:
                for i in range(r):
                    rest = [v for v in reservoirs[i][1] if v not in search.taken]
                    isolated = [x for x in reservoirs[i][0] if deg[x] == 0]
                    for x, v in zip(isolated, rest):
                        phi[x] = v
                report.restarts = total - 1
                return phi, report
    report.restarts = total
    raise RetriesExhausted("completion", f"no completion found after {total} attempts", report.as_dict())
