"""Sampled estimators for super-regular pairs and quasirandom graphs.

The "for all large S, T" clauses cannot be checked exhaustively, so the
checkers combine three kinds of evidence:

* every vertex degree is checked exactly;
* seeded random set pairs at the threshold size are checked, half of them
  drawn uniformly and half drawn from neighbourhoods (which is where
  structured counterexamples such as two cliques hide);
* for bipartite pairs, the deterministic pair-degree criterion (most pairs
  of vertices have the right degrees and a common neighbourhood of at most
  ``(d + eps)^2 |B|``) is evaluated exactly.

A pass is evidence rather than proof.  A fail always comes with a witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .graphcore import ColouredGraph

__all__ = [
    "RegularityParams",
    "RegularityVerdict",
    "Witness",
    "density",
    "check_super_regular_sampled",
    "check_pair_degree_regularity",
    "pair_degree_counts",
    "check_quasirandom",
]

_TOL = 1e-9


@dataclass(frozen=True)
class RegularityParams:
    """Parameters of a sampled regularity check."""

    eps: float
    d: float
    sample_count: int = 64
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if not 0 <= self.d <= 1:
            raise ValueError("d must lie in [0, 1]")
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")


@dataclass(frozen=True)
class Witness:
    """A failing certificate: the sets involved and the offending value.

    ``kind`` is ``"degree"`` (``left`` holds the vertex), ``"density"``
    (``left``/``right`` are the sets ``S``/``T``) or ``"pair-degree"``
    (``value`` is the number of good vertex pairs).
    """

    kind: str
    left: tuple[int, ...]
    right: tuple[int, ...]
    value: float

    def as_dict(self) -> dict:
        return {"kind": self.kind, "left": list(self.left), "right": list(self.right),
                "value": round(float(self.value), 12)}


@dataclass(frozen=True)
class RegularityVerdict:
    passed: bool
    worst_pair_density: float
    degree_range: tuple[float, float]
    witnesses: tuple[Witness, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_pair_density": round(float(self.worst_pair_density), 12),
            "degree_range": [round(float(x), 12) for x in self.degree_range],
            "witnesses": [w.as_dict() for w in self.witnesses[:10]],
        }


def _vertex_array(S: Iterable[int]) -> np.ndarray:
    return np.array(sorted({int(v) for v in S}), dtype=np.int64)


def density(g: ColouredGraph, S: Iterable[int], T: Iterable[int]) -> Fraction:
    """Exact density ``e_G(S, T) / (|S| |T|)`` as a fraction."""
    s, t = _vertex_array(S), _vertex_array(T)
    if len(s) == 0 or len(t) == 0:
        raise ValueError("density needs non-empty sets")
    if np.intersect1d(s, t).size:
        raise ValueError("density needs disjoint sets")
    e = int(g.adjacency_matrix[np.ix_(s, t)].sum())
    return Fraction(e, len(s) * len(t))


def _bip(g: ColouredGraph, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return g.adjacency_matrix[np.ix_(a, b)].astype(np.float64)


def pair_degree_counts(g: ColouredGraph, A: Iterable[int], B: Iterable[int], eps: float, d: float) -> tuple[int, float]:
    """Return ``(good, required)`` for the pair-degree criterion.

    A pair ``{u, v}`` of vertices of ``A`` (``u = v`` allowed) is good when
    both degrees into ``B`` are at least ``(d - eps)|B|`` and the common
    neighbourhood has at most ``(d + eps)^2 |B|`` vertices.  ``required`` is
    ``(1 - 5 eps) |A|^2 / 2``.
    """
    a, b = _vertex_array(A), _vertex_array(B)
    if len(a) < 2:
        raise ValueError("the pair-degree criterion needs |A| >= 2")
    m = _bip(g, a, b)
    deg = m.sum(axis=1)
    codeg = m @ m.T
    okv = deg >= (d - eps) * len(b) - _TOL
    good = okv[:, None] & okv[None, :] & (codeg <= (d + eps) ** 2 * len(b) + _TOL)
    count = int(np.triu(good).sum())
    return count, (1 - 5 * eps) * len(a) ** 2 / 2


def check_pair_degree_regularity(g: ColouredGraph, A: Iterable[int], B: Iterable[int], eps: float, d: float) -> bool:
    """Exact pair-degree criterion; see :func:`pair_degree_counts`."""
    good, required = pair_degree_counts(g, A, B, eps, d)
    return good >= required - _TOL


def _sample(rng: np.random.Generator, pool: np.ndarray, k: int) -> np.ndarray | None:
    if len(pool) < k:
        return None
    return np.sort(rng.choice(pool, size=k, replace=False))


def check_super_regular_sampled(
    g: ColouredGraph, A: Iterable[int], B: Iterable[int], p: RegularityParams
) -> RegularityVerdict:
    """Sampled ``(eps, d)``-super-regularity check of the pair ``(A, B)``.

    Degrees are checked exhaustively; ``p.sample_count`` seeded set pairs of
    sizes ``ceil(eps |A|)`` and ``ceil(eps |B|)`` are checked for density
    ``d +- eps``; the pair-degree criterion is evaluated exactly.
    """
    a, b = _vertex_array(A), _vertex_array(B)
    if np.intersect1d(a, b).size:
        raise ValueError("A and B must be disjoint")
    if min(len(a), len(b)) < 1 / p.eps - _TOL:
        raise ValueError(f"both sides need at least 1/eps = {1 / p.eps:.3g} vertices")
    m = _bip(g, a, b)
    witnesses: list[Witness] = []

    deg_a = m.sum(axis=1) / len(b)
    deg_b = m.sum(axis=0) / len(a)
    for verts, degs in ((a, deg_a), (b, deg_b)):
        for v, f in zip(verts, degs):
            if abs(f - p.d) > p.eps + _TOL:
                witnesses.append(Witness("degree", (int(v),), (), float(f)))
    all_deg = np.concatenate([deg_a, deg_b])
    degree_range = (float(all_deg.min()), float(all_deg.max()))

    sa, sb = math.ceil(p.eps * len(a) - _TOL), math.ceil(p.eps * len(b) - _TOL)
    ia, ib = np.arange(len(a)), np.arange(len(b))
    worst = None
    for k in range(p.sample_count):
        rng = np.random.default_rng([p.rng_seed, k])
        S = T = None
        mode = k % 3
        if mode:
            # Neighbourhood probe: S inside N(y) for a random y in B, and T
            # inside (or outside) N(x) for a random x in S's pool, x not in S.
            y = rng.integers(len(b))
            pool = np.flatnonzero(m[:, y])
            if len(pool) > sa:
                x = rng.choice(pool)
                S = _sample(rng, pool[pool != x], sa)
                nbr = m[x] > 0
                T = _sample(rng, ib[nbr] if mode == 1 else ib[~nbr], sb)
        if S is None or T is None:
            S = _sample(rng, ia, sa)
            T = _sample(rng, ib, sb)
        dens = float(m[np.ix_(S, T)].mean())
        if worst is None or abs(dens - p.d) > abs(worst - p.d):
            worst = dens
        if abs(dens - p.d) > p.eps + _TOL:
            witnesses.append(Witness("density", tuple(int(v) for v in a[S]),
                                     tuple(int(v) for v in b[T]), dens))

    if len(a) >= 2:
        good, required = pair_degree_counts(g, a, b, p.eps, p.d)
        if good < required - _TOL:
            witnesses.append(Witness("pair-degree", (), (), float(good)))

    return RegularityVerdict(
        passed=not witnesses,
        worst_pair_density=float(worst),
        degree_range=degree_range,
        witnesses=tuple(witnesses[:100]),
    )


def check_quasirandom(
    g: ColouredGraph, eps: float, d: float, *, sample_count: int = 64, rng_seed: int = 0
) -> RegularityVerdict:
    """Sampled ``(eps, d)``-quasirandomness check of the whole graph.

    Every degree must be ``(d +- eps) n``; seeded disjoint set pairs of size
    ``ceil(eps n)`` must have density ``d +- eps``.  Half of the pairs are
    neighbourhood probes ``S`` inside ``N(u)`` and ``T`` outside ``N[u]``.
    """
    n = g.vertex_count
    if n < 1 / eps - _TOL:
        raise ValueError(f"the graph needs at least 1/eps = {1 / eps:.3g} vertices")
    adj = g.adjacency_matrix
    witnesses: list[Witness] = []
    degs = g.degrees / n
    for v, f in enumerate(degs):
        if abs(f - d) > eps + _TOL:
            witnesses.append(Witness("degree", (v,), (), float(f)))
    s = math.ceil(eps * n - _TOL)
    if 2 * s > n:
        raise ValueError("eps is too large to draw two disjoint sets of size ceil(eps n)")
    verts = np.arange(n)
    worst = None
    for k in range(sample_count):
        rng = np.random.default_rng([rng_seed, k])
        S = T = None
        if k % 2:
            u = rng.integers(n)
            nbr = adj[u].copy()
            out = ~nbr
            out[u] = False
            S = _sample(rng, verts[nbr], s)
            T = _sample(rng, verts[out], s)
        if S is None or T is None:
            both = rng.choice(n, size=2 * s, replace=False)
            S, T = np.sort(both[:s]), np.sort(both[s:])
        dens = float(adj[np.ix_(S, T)].mean())
        if worst is None or abs(dens - d) > abs(worst - d):
            worst = dens
        if abs(dens - d) > eps + _TOL:
            witnesses.append(Witness("density", tuple(int(v) for v in S), tuple(int(v) for v in T), dens))
    return RegularityVerdict(
        passed=not witnesses,
        worst_pair_density=float(worst),
        degree_range=(float(degs.min()), float(degs.max())),
        witnesses=tuple(witnesses[:100]),
    )


def regularity_gate(
    g: ColouredGraph, A: Sequence[int], B: Sequence[int], p: RegularityParams
) -> RegularityVerdict | None:
    """Like :func:`check_super_regular_sampled` but ``None`` when a side is
    smaller than ``1/eps`` (the check is then undefined)."""
    if min(len(A), len(B)) < 1 / p.eps - _TOL:
        return None
    return check_super_regular_sampled(g, A, B, p)
