"""Iterative approximate embedding: one rainbow matching per cluster.

Round ``t`` embeds most of one cluster ``X_s`` by a rainbow matching in its
candidacy graph ``A_s`` and then updates the candidacy graphs and colour
sets of every other cluster.  Only the layer ``G_A`` is used here; the
layer ``G_B`` is tracked through the ``B`` candidacy graphs for the
completion step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import RetriesExhausted, VerificationError
from ..graphcore import BlowUpInstance, ColouredGraph
from ..hypermatch import (
    NibbleConfig,
    WeightFunction,
    build_conflict_hypergraph,
    degree_profile,
    matching_to_candidacy,
    pseudorandom_matching,
)
from .candidacy import CandidacyGraph, pad_colour_sets
from .config import PipelineConfig
from .transforms import split_host_colours

__all__ = ["EngineState", "PruneResult", "RoundReport", "init_engine", "prune_bad",
           "approx_embed_round", "check_round_invariant"]


@dataclass
class EngineState:
    """Mutable state of one pipeline attempt."""

    inst: BlowUpInstance
    GA: ColouredGraph
    GB: ColouredGraph
    X: list[np.ndarray]
    V: list[np.ndarray]
    phi: np.ndarray
    used: set[int]
    A: dict[int, CandidacyGraph]
    B: dict[int, CandidacyGraph]
    egstar: list[np.ndarray]
    processed: list[int] = field(default_factory=list)
    codegree_K: int = 0

    @property
    def h_adj(self) -> np.ndarray:
        return self.inst.H.adjacency_matrix

    @property
    def ga_adj(self) -> np.ndarray:
        return self.GA.adjacency_matrix

    @property
    def gb_adj(self) -> np.ndarray:
        return self.GB.adjacency_matrix

    @property
    def ga_col(self) -> np.ndarray:
        return self.GA.colour_matrix

    def embedded_edge_count(self) -> int:
        h = self.inst.H
        if not h.edge_count:
            return 0
        e = h.edges
        return int(((self.phi[e[:, 0]] >= 0) & (self.phi[e[:, 1]] >= 0)).sum())


def init_engine(inst: BlowUpInstance, gamma: float, seed: int) -> EngineState:
    """Split the host into layers and start from complete candidacy graphs.

    The artificial mirror edges ``E_G*`` between ``V_i`` and its mirror copy
    are a seeded random bipartite graph of density ``gamma * d``.
    """
    ga, gb = split_host_colours(inst.G, gamma, seed)
    X = [np.array(x, dtype=np.int64) for x in inst.X]
    V = [np.array(v, dtype=np.int64) for v in inst.V]
    rng = np.random.default_rng([seed, 0xB5])
    d_b = gamma * inst.d
    egstar = [rng.random((len(v), len(v))) < d_b for v in V]
    return EngineState(
        inst=inst, GA=ga, GB=gb, X=X, V=V,
        phi=np.full(inst.H.vertex_count, -1, dtype=np.int64),
        used=set(),
        A={i: CandidacyGraph.complete(X[i], V[i]) for i in range(inst.r)},
        B={i: CandidacyGraph.complete(X[i], V[i]) for i in range(inst.r)},
        egstar=egstar,
    )


# ----------------------------------------------------------------- pruning
@dataclass
class PruneResult:
    """Pruned candidacy and host graphs plus exact removal counters."""

    a0: CandidacyGraph
    ai: dict[int, CandidacyGraph]
    g: dict[int, np.ndarray]
    counters: dict[str, Any]
    within_budget: bool


def _hot_neighbours(state: EngineState, s: int) -> list[int]:
    """Unprocessed clusters with an H-edge to ``X_s``."""
    h = state.h_adj
    out = []
    for i in sorted(state.A):
        if i != s and h[np.ix_(state.X[s], state.X[i])].any():
            out.append(i)
    return out


def prune_bad(state: EngineState, s: int, a0: CandidacyGraph, eps: float) -> PruneResult:
    """Remove atypical candidacy edges along with bad host edges and vertices.

    For every unprocessed cluster ``i`` joined to ``X_s`` by H-edges:

    * a candidacy edge ``x0 v0`` of ``A_0`` is bad when for some H-neighbour
      ``x_i`` of ``x0`` the count ``|N_{A_i}(x_i) & N_G(v0)|`` is not within
      ``3 eps |V_i|`` of ``d_i^G deg_{A_i}(x_i)``;
    * a candidacy edge ``x_i v_i`` of ``A_i`` is bad when for some
      H-neighbour ``x0`` the count ``|N_{A_0}(x0) & N_G(v_i)|`` is not within
      ``3 eps |V_0|`` of ``d_i^G deg_{A_0}(x0)``;
    * a host edge ``v0 v_i`` is bad when ``e_H(N_{A_0}(v0), N_{A_i}(v_i))``
      is not within ``3 eps e_H(X_0, X_i)`` of ``d_0 d_i e_H(X_0, X_i)``.

    Host vertices of large bad degree form ``V^bad``.  The result is within
    budget when every removal fraction is at most ``3 eps r`` and every
    ``|V^bad|`` at most ``3 eps r n``.
    """
    h = state.h_adj
    r = state.inst.r
    n0 = len(state.V[s])
    m0 = a0.mask.astype(np.float64)
    d0 = a0.density()
    rem0 = np.zeros_like(a0.mask)
    ai_out: dict[int, CandidacyGraph] = {}
    g_out: dict[int, np.ndarray] = {}
    counters: dict[str, Any] = {"A0_edges": a0.edge_count, "A0_removed": 0, "Ai_removed": {},
                                "G_bad": {}, "V_bad": {}}
    within = True
    budget = 3 * eps * r
    gbad: dict[int, np.ndarray] = {}
    gbad_deg0 = np.zeros(n0, dtype=np.int64)
    for i in _hot_neighbours(state, s):
        ai = state.A[i]
        mi = ai.mask.astype(np.float64)
        h0i = h[np.ix_(state.X[s], state.X[i])].astype(np.float64)
        gsi = state.ga_adj[np.ix_(state.V[s], state.V[i])]
        gf = gsi.astype(np.float64)
        ni = len(state.V[i])
        dg = float(gsi.mean()) if gsi.size else 0.0
        di = ai.density()
        # F12': rows are x_i, columns v0.
        val12 = mi @ gf.T
        exp12 = dg * mi.sum(axis=1)[:, None]
        bad12 = np.abs(val12 - exp12) > 3 * eps * ni + 1e-9
        rem0 |= (h0i @ bad12.astype(np.float64)) > 0
        # F13': rows are x0, columns v_i.
        val13 = m0 @ gf
        exp13 = dg * m0.sum(axis=1)[:, None]
        bad13 = np.abs(val13 - exp13) > 3 * eps * n0 + 1e-9
        remi = ((h0i.T @ bad13.astype(np.float64)) > 0) & ai.mask
        new_ai = ai.copy()
        new_ai.mask &= ~remi
        new_ai.clear_non_edges()
        ai_out[i] = new_ai
        counters["Ai_removed"][i] = int(remi.sum())
        if ai.edge_count and remi.sum() > budget * ai.edge_count:
            within = False
        # F23': host edges between V_0 and V_i.
        eh = float(h0i.sum())
        val23 = m0.T @ h0i @ mi
        bad23 = gsi & (np.abs(val23 - d0 * di * eh) > 3 * eps * eh + 1e-9)
        gbad[i] = bad23
        gbad_deg0 += bad23.sum(axis=1)
        counters["G_bad"][i] = int(bad23.sum())
        g_out[i] = gsi.copy()

    limit = 3 * r * eps * n0
    vbad0 = gbad_deg0 > limit
    counters["V_bad"][s] = int(vbad0.sum())
    if vbad0.sum() > limit:
        within = False
    for i, bad23 in gbad.items():
        vbad_i = bad23.sum(axis=0) > limit
        counters["V_bad"][i] = int(vbad_i.sum())
        if vbad_i.sum() > limit:
            within = False
        g = g_out[i]
        g[vbad0, :] = False
        g &= ~(bad23 & ~vbad_i[None, :])
    rem0 &= a0.mask
    new_a0 = a0.copy()
    new_a0.mask &= ~rem0
    new_a0.mask[:, vbad0] = False
    new_a0.clear_non_edges()
    removed0 = a0.edge_count - new_a0.edge_count
    counters["A0_removed"] = removed0
    if a0.edge_count and removed0 > budget * a0.edge_count:
        within = False
    return PruneResult(new_a0, ai_out, g_out, counters, within)


# ------------------------------------------------------------------ rounds
@dataclass
class RoundReport:
    """Per-round statistics and the outcome of the clause checks (I)-(III)."""

    cluster: int
    t: int
    size: int
    candidacy_edges: int = 0
    colour_filtered: int = 0
    pruned: bool = False
    prune_counters: dict[str, Any] = field(default_factory=dict)
    hyperedges: int = 0
    uniformity: int = 0
    max_degree: int = 0
    max_codegree: int = 0
    matched: int = 0
    target: float = 0.0
    attempts: int = 0
    clause_ok: dict[str, bool] = field(default_factory=dict)
    weights: dict[str, Any] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "cluster": self.cluster, "t": self.t, "size": self.size,
            "candidacy_edges": self.candidacy_edges, "colour_filtered": self.colour_filtered,
            "pruned": self.pruned, "prune_counters": _jsonable(self.prune_counters),
            "hyperedges": self.hyperedges, "uniformity": self.uniformity,
            "max_degree": self.max_degree, "max_codegree": self.max_codegree,
            "matched": self.matched, "target": round(self.target, 9), "attempts": self.attempts,
            "clauses": dict(self.clause_ok), "weights": self.weights, "flags": list(self.flags),
        }


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def _filter_colours(a: CandidacyGraph, used: set[int]) -> tuple[CandidacyGraph, int]:
    """Drop edges whose colours repeat or are already used."""
    out = a.copy()
    if out.capacity == 0 or not out.mask.any():
        return out, 0
    slots = out.slots
    bad = np.zeros(out.mask.shape, dtype=bool)
    if used:
        bad |= np.isin(slots, np.fromiter(used, dtype=np.int64)).any(axis=2)
    k = out.capacity
    for p in range(k):
        for q in range(p + 1, k):
            bad |= (slots[:, :, p] >= 0) & (slots[:, :, p] == slots[:, :, q])
    bad &= out.mask
    out.mask &= ~bad
    out.clear_non_edges()
    return out, int(bad.sum())


def _edge_values(a: CandidacyGraph, mat: np.ndarray) -> np.ndarray:
    ii, jj = np.nonzero(a.mask)
    return mat[ii, jj]


def _weight_suite(state: EngineState, s: int, a0: CandidacyGraph, ai: dict[int, CandidacyGraph],
                  gsub: dict[int, np.ndarray], cap: int, top: int, rng: np.random.Generator) -> list[WeightFunction]:
    """Weight functions over vertex degrees and colour statistics after the update."""
    m = a0.edge_count
    ws = [WeightFunction.constant(m, "size")]
    if m == 0:
        return ws
    h = state.h_adj
    ga_col = state.ga_col
    lam = max(1, int(state.inst.Lambda or 1))
    cand: list[tuple[int, str, np.ndarray]] = []
    for i, a in ai.items():
        h0i = h[np.ix_(state.X[s], state.X[i])].astype(np.float64)
        g = gsub[i].astype(np.float64)
        mi = a.mask.astype(np.float64)
        # Degree weights: S = N_H(N_{A_i}(v)) in X_0, T = N_G(v) in V_0.
        picks = rng.permutation(len(state.V[i]))[:top]
        for j in picks.tolist():
            S = (h0i @ mi[:, j]) > 0
            T = g[:, j] > 0
            w = _edge_values(a0, np.outer(S, T).astype(np.int64))
            ws.append(WeightFunction(f"deg:{i}:{int(state.V[i][j])}", w))
        # Codegree weights for a few vertex pairs of V_i.
        nv = len(state.V[i])
        for _ in range(min(top, nv * (nv - 1) // 2)):
            u, v = rng.choice(nv, size=2, replace=False).tolist()
            S = (h0i @ (mi[:, u] * mi[:, v])) > 0
            T = (g[:, u] * g[:, v]) > 0
            w = _edge_values(a0, np.outer(S, T).astype(np.int64))
            ws.append(WeightFunction(f"codeg:{i}:{int(state.V[i][u])}:{int(state.V[i][v])}", w))
        # Candidacy colours of A_i and host colours of G[V_0, V_i].
        if a.capacity:
            vals, counts = np.unique(a.slots[a.mask][a.slots[a.mask] >= 0], return_counts=True)
            for alpha in vals[np.argsort(-counts, kind="stable")][:top].tolist():
                e_alpha = (a.slots == alpha).any(axis=2) & a.mask
                mat = h0i @ e_alpha.astype(np.float64) @ g.T
                cand.append((alpha, f"cand:{i}:{alpha}", np.minimum(_edge_values(a0, mat), lam).astype(np.int64)))
        cols = ga_col[np.ix_(state.V[s], state.V[i])]
        cols = np.where(gsub[i], cols, -1)
        vals, counts = np.unique(cols[cols >= 0], return_counts=True)
        hm = h0i @ mi
        for alpha in vals[np.argsort(-counts, kind="stable")][:top].tolist():
            g_alpha = (cols == alpha).astype(np.float64)
            mat = hm @ g_alpha.T
            ws.append(WeightFunction(f"host:{i}:{alpha}", np.minimum(_edge_values(a0, mat), lam).astype(np.int64)))
        # Colour-pair weights: host colour alpha with candidacy colour beta.
        if a.capacity and len(vals):
            betas = np.unique(a.slots[a.mask][a.slots[a.mask] >= 0])
            for alpha in vals[np.argsort(-counts, kind="stable")][:2].tolist():
                g_alpha = (cols == alpha).astype(np.float64)
                for beta in betas[:2].tolist():
                    e_beta = (a.slots == beta).any(axis=2) & a.mask
                    mat = h0i @ e_beta.astype(np.float64) @ g_alpha.T
                    ws.append(WeightFunction(f"pair:{i}:{alpha}:{beta}",
                                             np.minimum(_edge_values(a0, mat), lam).astype(np.int64)))
    for _, name, w in cand:
        ws.append(WeightFunction(name, w))
    return ws


def _apply_update(state: EngineState, s: int, sigma: dict[int, int], ai: dict[int, CandidacyGraph],
                  gsub: dict[int, np.ndarray]) -> tuple[dict[int, CandidacyGraph], dict[int, CandidacyGraph]]:
    """Updated A- and B-candidacy graphs (and colour sets) with respect to ``sigma``."""
    h = state.inst.H
    ga_col = state.ga_col
    gb_adj = state.gb_adj
    xpos = {int(x): k for k, x in enumerate(state.X[s])}
    vpos = {int(v): k for k, v in enumerate(state.V[s])}
    new_a: dict[int, CandidacyGraph] = {}
    for i, a in ai.items():
        a = a.copy()
        vi = state.V[i]
        for row, x in enumerate(state.X[i].tolist()):
            for y in h.neighbours(x):
                if y in sigma:
                    u = sigma[y]
                    a.mask[row] &= gsub[i][vpos[u]]
                    cols = np.where(a.mask[row], ga_col[u, vi], -1)
                    a.append_colour(row, cols)
        a.clear_non_edges()
        new_a[i] = a
    new_b: dict[int, CandidacyGraph] = {}
    for i, b in state.B.items():
        b = b.copy()
        vi = state.V[i]
        for row, x in enumerate(state.X[i].tolist()):
            if i == s and x in sigma:
                b.mask[row] &= state.egstar[s][vpos[sigma[x]]]
            for y in h.neighbours(x):
                if y in sigma:
                    b.mask[row] &= gb_adj[sigma[y], vi]
        new_b[i] = b
    del xpos
    return new_a, new_b


def _colour_stats(a: CandidacyGraph) -> tuple[int, int]:
    """Maximum colour multiplicity and maximum colour-pair codegree on ``a``."""
    if a.capacity == 0 or not a.mask.any():
        return 0, 0
    sl = a.slots[a.mask]
    flat = sl[sl >= 0]
    mult = int(np.unique(flat, return_counts=True)[1].max()) if flat.size else 0
    keys = []
    k = sl.shape[1]
    for p in range(k):
        for q in range(p + 1, k):
            ok = (sl[:, p] >= 0) & (sl[:, q] >= 0)
            lo = np.minimum(sl[ok, p], sl[ok, q])
            hi = np.maximum(sl[ok, p], sl[ok, q])
            keys.append(lo * (1 << 32) + hi)
    allk = np.concatenate(keys) if keys else np.zeros(0, dtype=np.int64)
    codeg = int(np.unique(allk, return_counts=True)[1].max()) if allk.size else 0
    return mult, codeg


def approx_embed_round(state: EngineState, s: int, cfg: PipelineConfig, eps_now: float,
                       eps_next: float, seed: int) -> tuple[dict[int, int], RoundReport]:
    """Embed most of cluster ``s`` by a rainbow matching and update all candidacy graphs.

    The state is modified in place.  With ``cfg.strict_rounds`` a round
    whose best attempt still fails one of the clauses raises
    :class:`RetriesExhausted`; otherwise the best attempt is kept and the
    failed clauses are flagged in the report.
    """
    t = len(state.processed)
    rep = RoundReport(cluster=s, t=t + 1, size=len(state.X[s]))
    a0, filtered = _filter_colours(state.A[s], state.used)
    rep.colour_filtered = filtered
    rep.candidacy_edges = a0.edge_count
    hot = _hot_neighbours(state, s)

    pr = prune_bad(state, s, a0, eps_now)
    rep.prune_counters = pr.counters
    if pr.within_budget:
        rep.pruned = True
        a0p, ai, gsub = pr.a0, pr.ai, pr.g
    else:
        rep.flags.append("prune-over-budget")
        a0p = a0
        ai = {i: state.A[i] for i in hot}
        gsub = {i: state.ga_adj[np.ix_(state.V[s], state.V[i])] for i in hot}

    sizes = a0p.set_sizes()[a0p.mask]
    t_pad = max(t, int(sizes.max(initial=0)))
    a0pad = pad_colour_sets(a0p, t_pad, first_dummy=state.inst.G.colour_bound)
    sigma: dict[int, int] = {}
    best = None
    n_ref = len(state.X[s])
    cap = cfg.codegree_cap or math.ceil(max(1, state.inst.n) ** (1 / 3))
    cap = max(cap, state.codegree_K)
    if a0pad.edge_count:
        hyper = build_conflict_hypergraph(a0pad)
        prof = degree_profile(hyper)
        rep.hyperedges, rep.uniformity = hyper.edge_count, hyper.uniformity
        rep.max_degree, rep.max_codegree = prof.max_degree, prof.max_codegree
        wrng = np.random.default_rng([seed, 0x77])
        ws = _weight_suite(state, s, a0p, ai, gsub, cap, cfg.weight_colours, wrng)
        for attempt in range(cfg.round_retries):
            res = pseudorandom_matching(
                hyper, ws, NibbleConfig(mode=cfg.nibble_mode, theta=cfg.theta, seed=seed * 1009 + attempt))
            cand = matching_to_candidacy(hyper, res)
            new_a, _ = _apply_update(state, s, cand, ai, gsub)
            ok = {"I": len(cand) >= (1 - eps_next) * n_ref - 1e-9}
            ok_ii = ok_iii = True
            for i, a in new_a.items():
                mult, codeg = _colour_stats(a)
                dg = float(gsub[i].mean()) if gsub[i].size else 0.0
                if mult > (1 + eps_next) * dg * ai[i].density() * len(state.X[i]) + 1e-9:
                    ok_ii = False
                if codeg > cap:
                    ok_iii = False
            ok["II"], ok["III"] = ok_ii, ok_iii
            score = (sum(not v for v in ok.values()), -len(cand), attempt)
            if best is None or score < best[0]:
                best = (score, cand, ok, res, attempt)
            if all(ok.values()):
                break
        _, sigma, clause_ok, res, attempt = best
        rep.attempts = attempt + 1
        rep.clause_ok = clause_ok
        tracked = {k: w for k, w in res.weight_report.items() if w.tracked}
        ratios = [w.ratio for w in tracked.values() if w.target > 0]
        rep.weights = {
            "functions": len(res.weight_report),
            "tracked": len(tracked),
            "min_ratio": round(min(ratios), 6) if ratios else None,
            "max_ratio": round(max(ratios), 6) if ratios else None,
        }
        failed = [k for k, v in clause_ok.items() if not v]
        if failed:
            rep.flags.append("clauses-failed:" + ",".join(failed))
            if cfg.strict_rounds:
                raise RetriesExhausted("round", f"cluster {s}: clauses {', '.join(failed)} failed", rep.as_dict())
    else:
        rep.clause_ok = {"I": n_ref == 0, "II": True, "III": True}
        if n_ref:
            rep.flags.append("clauses-failed:I")
    rep.matched = len(sigma)
    rep.target = (1 - eps_next) * n_ref

    # Commit.
    new_a, new_b = _apply_update(state, s, sigma, ai, gsub)
    vpos = {int(v): k for k, v in enumerate(state.V[s])}
    xpos = {int(x): k for k, x in enumerate(state.X[s])}
    for x, v in sigma.items():
        for c in a0p.colour_set(xpos[x], vpos[v]):
            if c in state.used:
                raise VerificationError(f"colour {c} reused in round {t + 1}")
            state.used.add(c)
        state.phi[x] = v
    del state.A[s]
    for i in hot:
        state.A[i] = new_a[i]
    state.B = new_b
    state.processed.append(s)
    for a in state.A.values():
        state.codegree_K = max(state.codegree_K, _colour_stats(a)[1])
    if len(state.used) != state.embedded_edge_count():
        raise VerificationError("rainbow invariant broken: used colours do not match embedded edges")
    check_round_invariant(state)
    return sigma, rep


def check_round_invariant(state: EngineState) -> None:
    """Exhaustively re-derive every candidacy edge's condition from ``phi``.

    A-graphs: ``phi(y) v`` is a ``G_A`` edge for every embedded H-neighbour
    ``y`` and the colour set equals the colours of those edges.  B-graphs:
    ``phi(y) v`` is a ``G_B`` edge, and ``phi(x) pi(v)`` is a mirror edge when
    ``x`` itself is embedded.  Raises :class:`VerificationError`.
    """
    h = state.inst.H
    phi = state.phi
    ga_adj, ga_col, gb_adj = state.ga_adj, state.ga_col, state.gb_adj
    for i, a in state.A.items():
        vi = state.V[i]
        for row, x in enumerate(state.X[i].tolist()):
            ys = [y for y in h.neighbours(x) if phi[y] >= 0]
            ok = a.mask[row].copy()
            expect: list[list[int]] = [[] for _ in range(len(vi))]
            for y in ys:
                if not (ga_adj[phi[y], vi] | ~ok).all():
                    raise VerificationError(f"A-candidacy edge of {x} violates the update rule")
                for j in np.flatnonzero(ok).tolist():
                    expect[j].append(int(ga_col[phi[y], vi[j]]))
            for j in np.flatnonzero(ok).tolist():
                if sorted(expect[j]) != list(a.colour_set(row, j)):
                    raise VerificationError(f"colour set of ({x}, {int(vi[j])}) is inconsistent")
    for i, b in state.B.items():
        vi = state.V[i]
        vpos = {int(v): k for k, v in enumerate(vi)}
        for row, x in enumerate(state.X[i].tolist()):
            ok = b.mask[row]
            for y in h.neighbours(x):
                if phi[y] >= 0 and (ok & ~gb_adj[phi[y], vi]).any():
                    raise VerificationError(f"B-candidacy edge of {x} violates the G_B rule")
            if phi[x] >= 0 and (ok & ~state.egstar[i][vpos[int(phi[x])]]).any():
                raise VerificationError(f"B-candidacy edge of {x} violates the mirror rule")
