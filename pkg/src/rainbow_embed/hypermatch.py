"""Conflict hypergraphs and the seeded pseudorandom matching engine.

A candidacy edge ``xv`` with colour set ``c(xv)`` becomes the hyperedge
``{x, v} | c(xv)``.  Two hyperedges are disjoint exactly when the candidacy
edges share no endpoint and no colour, so matchings of the hypergraph are
rainbow matchings of the candidacy graph.

Matchings are produced by random greedy selection (visit hyperedges in a
seeded random order, keep those disjoint from everything kept so far) or by
a nibble that takes a ``theta / Delta`` fraction per round.  Weight
functions are not optimised; their achieved weight is reported against the
``w(E) / Delta`` target expected of a pseudorandom matching.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .pipeline.candidacy import CandidacyGraph

__all__ = [
    "Hypergraph",
    "ConflictHypergraph",
    "WeightFunction",
    "WeightReport",
    "MatchingResult",
    "NibbleConfig",
    "DegreeProfile",
    "build_conflict_hypergraph",
    "degree_profile",
    "pseudorandom_matching",
    "matching_to_candidacy",
]


class Hypergraph:
    """Uniform hypergraph on vertices ``0 .. vertex_count - 1``.

    ``edges`` is an ``(m, k)`` integer array; every row must consist of
    ``k`` distinct vertices.
    """

    def __init__(self, vertex_count: int, edges: Sequence[Sequence[int]] | np.ndarray):
        arr = np.asarray(edges, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 0)
        if arr.ndim != 2:
            raise ValueError("edges must form an (m, k) array")
        if arr.size and (arr.min() < 0 or arr.max() >= vertex_count):
            raise ValueError("hyperedge vertex out of range")
        srt = np.sort(arr, axis=1)
        if arr.shape[1] > 1 and (srt[:, 1:] == srt[:, :-1]).any():
            raise ValueError("hyperedges must consist of distinct vertices")
        srt.setflags(write=False)
        self.vertex_count = int(vertex_count)
        self.edges = srt

    @property
    def uniformity(self) -> int:
        return int(self.edges.shape[1])

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def vertex_class(self, vertex: int) -> str:
        return "vertex"

    def class_labels(self) -> np.ndarray:
        return np.zeros(self.vertex_count, dtype=np.int64)

    class_names: tuple[str, ...] = ("vertex",)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(vertices={self.vertex_count}, edges={self.edge_count}, k={self.uniformity})"


class ConflictHypergraph(Hypergraph):
    """The ``(t+2)``-uniform hypergraph on ``X_0 | V_0 | C``.

    Vertex ids are laid out as left vertices, then right vertices, then
    colours.  ``left_ids``, ``right_ids`` and ``colour_ids`` translate back
    to the external names, and ``origin[e]`` is the index of the candidacy
    edge that produced hyperedge ``e``.
    """

    class_names = ("left", "right", "colour")

    def __init__(
        self,
        left_ids: np.ndarray,
        right_ids: np.ndarray,
        colour_ids: np.ndarray,
        edges: np.ndarray,
        origin: np.ndarray,
    ):
        super().__init__(len(left_ids) + len(right_ids) + len(colour_ids), edges)
        self.left_ids = np.asarray(left_ids, dtype=np.int64)
        self.right_ids = np.asarray(right_ids, dtype=np.int64)
        self.colour_ids = np.asarray(colour_ids, dtype=np.int64)
        self.origin = np.asarray(origin, dtype=np.int64)
        # Row layout of ``edges`` after sorting is [left, right, colours...]
        # because the id ranges are ordered that way.

    def class_labels(self) -> np.ndarray:
        lab = np.zeros(self.vertex_count, dtype=np.int64)
        nl, nr = len(self.left_ids), len(self.right_ids)
        lab[nl:nl + nr] = 1
        lab[nl + nr:] = 2
        return lab

    def vertex_class(self, vertex: int) -> str:
        return self.class_names[int(self.class_labels()[vertex])]

    def pair_of(self, e: int) -> tuple[int, int]:
        """External ``(x, v)`` of hyperedge ``e``."""
        nl = len(self.left_ids)
        row = self.edges[e]
        return int(self.left_ids[row[0]]), int(self.right_ids[row[1] - nl])

    def colours_of(self, e: int) -> tuple[int, ...]:
        base = len(self.left_ids) + len(self.right_ids)
        return tuple(int(self.colour_ids[c - base]) for c in self.edges[e, 2:])


def build_conflict_hypergraph(a: "CandidacyGraph") -> ConflictHypergraph:
    """One hyperedge ``{x, v} | c(xv)`` per edge of the candidacy graph.

    Every colour set must have the same size ``t``; pad with
    :func:`rainbow_embed.pipeline.pad_colour_sets` first.
    """
    xs, vs, cols = a.edge_arrays()
    sizes = {len(c) for c in cols}
    if len(sizes) > 1:
        raise ValueError(f"non-uniform colour-set sizes {sorted(sizes)}; pad the colour sets first")
    t = sizes.pop() if sizes else 0
    left_ids = np.asarray(a.left, dtype=np.int64)
    right_ids = np.asarray(a.right, dtype=np.int64)
    lpos = {int(x): i for i, x in enumerate(left_ids)}
    rpos = {int(v): i for i, v in enumerate(right_ids)}
    colour_ids = np.array(sorted({c for cs in cols for c in cs}), dtype=np.int64)
    cpos = {int(c): i for i, c in enumerate(colour_ids)}
    nl, nr = len(left_ids), len(right_ids)
    rows = np.empty((len(xs), t + 2), dtype=np.int64)
    for i, (x, v, cs) in enumerate(zip(xs, vs, cols)):
        rows[i, 0] = lpos[int(x)]
        rows[i, 1] = nl + rpos[int(v)]
        for j, c in enumerate(cs):
            rows[i, 2 + j] = nl + nr + cpos[int(c)]
    return ConflictHypergraph(left_ids, right_ids, colour_ids, rows, np.arange(len(xs)))


@dataclass(frozen=True)
class DegreeProfile:
    max_degree: int
    max_codegree: int
    histograms: Mapping[str, np.ndarray]

    def __iter__(self):
        return iter((self.max_degree, self.max_codegree, self.histograms))


def degree_profile(h: Hypergraph) -> DegreeProfile:
    """Exact maximum degree and codegree plus per-class degree histograms.

    The codegree is taken over vertex pairs that occur together in at least
    one hyperedge, so any non-empty hypergraph of uniformity at least 2 has
    codegree at least 1.
    """
    deg = np.bincount(h.edges.ravel(), minlength=h.vertex_count) if h.edge_count else np.zeros(h.vertex_count, dtype=np.int64)
    codeg = 0
    if h.edge_count and h.uniformity >= 2:
        keys = []
        for i, j in combinations(range(h.uniformity), 2):
            keys.append(h.edges[:, i] * h.vertex_count + h.edges[:, j])
        _, counts = np.unique(np.concatenate(keys), return_counts=True)
        codeg = int(counts.max())
    labels = h.class_labels()
    hist = {}
    for k, name in enumerate(h.class_names):
        d = deg[labels == k]
        hist[name] = np.bincount(d) if d.size else np.zeros(1, dtype=np.int64)
    return DegreeProfile(int(deg.max()) if deg.size else 0, codeg, hist)


@dataclass(frozen=True)
class WeightFunction:
    """Non-negative integer weights on the hyperedges, at most ``cap``."""

    name: str
    weights: np.ndarray
    cap: int | None = None

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if w.size and (w.min() < 0 or not np.all(np.equal(np.mod(w, 1), 0))):
            raise ValueError("weights must be non-negative integers")
        w = w.astype(np.int64)
        if self.cap is not None and w.size and w.max() > self.cap:
            raise ValueError(f"weight function {self.name!r} exceeds its cap {self.cap}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def constant(cls, m: int, name: str = "size") -> "WeightFunction":
        return cls(name, np.ones(m, dtype=np.int64), 1)

    @classmethod
    def indicator(cls, m: int, ids: Iterable[int], name: str) -> "WeightFunction":
        w = np.zeros(m, dtype=np.int64)
        w[list(ids)] = 1
        return cls(name, w, 1)


@dataclass(frozen=True)
class WeightReport:
    achieved: int
    target: float
    total: int
    tracked: bool

    @property
    def ratio(self) -> float:
        return self.achieved / self.target if self.target else float("nan")

    def as_dict(self) -> dict:
        return {"achieved": self.achieved, "target": round(self.target, 9),
                "total": self.total, "tracked": self.tracked}


@dataclass(frozen=True)
class NibbleConfig:
    """Matching-process settings.

    ``mode`` is ``"greedy"`` or ``"nibble"``; ``theta`` is the per-round
    fraction of the nibble; weight functions whose total is below
    ``mass_factor * max_weight * Delta`` are reported as untracked.
    """

    mode: str = "greedy"
    theta: float = 0.1
    seed: int = 0
    mass_factor: float = 1.0
    max_rounds: int = 10_000

    def __post_init__(self):
        if self.mode not in ("greedy", "nibble"):
            raise ValueError("mode must be 'greedy' or 'nibble'")
        if not 0 < self.theta <= 1:
            raise ValueError("theta must lie in (0, 1]")


@dataclass(frozen=True)
class MatchingResult:
    """Chosen hyperedge ids (ascending) and their weight report."""

    edges: tuple[int, ...]
    covered_left: int
    covered_right: int
    covered_vertices: int
    weight_report: Mapping[str, WeightReport] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.edges)


def _greedy(edges: np.ndarray, order: np.ndarray, used: np.ndarray) -> list[int]:
    chosen = []
    rows = edges.tolist()
    for e in order.tolist():
        row = rows[e]
        if not any(used[v] for v in row):
            for v in row:
                used[v] = True
            chosen.append(e)
    return chosen


def _nibble(h: Hypergraph, cfg: NibbleConfig, rng: np.random.Generator, used: np.ndarray) -> list[int]:
    chosen: list[int] = []
    edges = h.edges
    alive = np.arange(h.edge_count)
    for _ in range(cfg.max_rounds):
        if alive.size == 0:
            break
        alive = alive[~used[edges[alive]].any(axis=1)]
        if alive.size == 0:
            break
        delta = int(np.bincount(edges[alive].ravel()).max())
        pick = alive[rng.random(alive.size) < cfg.theta / delta]
        if pick.size:
            chosen.extend(_greedy(edges, rng.permutation(pick), used))
    if alive.size:
        alive = alive[~used[edges[alive]].any(axis=1)]
        chosen.extend(_greedy(edges, rng.permutation(alive), used))
    return chosen


def pseudorandom_matching(
    h: Hypergraph, ws: Sequence[WeightFunction] = (), cfg: NibbleConfig | None = None
) -> MatchingResult:
    """Seeded random-greedy (or nibble) matching with weight tracking.

    The result is maximal: every hyperedge meets a chosen one.  Identical
    ``(h, ws, cfg)`` always give the identical result.
    """
    cfg = cfg or NibbleConfig()
    rng = np.random.default_rng([cfg.seed, 0x6D61])
    used = np.zeros(h.vertex_count, dtype=bool)
    if cfg.mode == "greedy":
        chosen = _greedy(h.edges, rng.permutation(h.edge_count), used)
    else:
        chosen = _nibble(h, cfg, rng, used)
    chosen_arr = np.array(sorted(chosen), dtype=np.int64)
    _assert_matching(h, chosen_arr)

    delta = degree_profile(h).max_degree
    report = {}
    for w in ws:
        if len(w.weights) != h.edge_count:
            raise ValueError(f"weight function {w.name!r} has the wrong length")
        total = int(w.weights.sum())
        achieved = int(w.weights[chosen_arr].sum()) if chosen_arr.size else 0
        target = total / delta if delta else 0.0
        wmax = int(w.weights.max()) if w.weights.size else 0
        tracked = wmax > 0 and total >= cfg.mass_factor * wmax * delta
        report[w.name] = WeightReport(achieved, target, total, tracked)

    if isinstance(h, ConflictHypergraph):
        cl = cr = len(chosen_arr)
    else:
        cl, cr = int(used.sum()), 0
    return MatchingResult(
        edges=tuple(int(e) for e in chosen_arr),
        covered_left=cl,
        covered_right=cr,
        covered_vertices=int(used.sum()),
        weight_report=report,
    )


def _assert_matching(h: Hypergraph, chosen: np.ndarray) -> None:
    if chosen.size:
        flat = h.edges[chosen].ravel()
        if np.unique(flat).size != flat.size:
            raise AssertionError("matching process produced overlapping hyperedges")


def matching_to_candidacy(h: ConflictHypergraph, result: MatchingResult) -> dict[int, int]:
    """Translate a matching back to the map ``x -> v`` of candidacy edges."""
    return dict(sorted(h.pair_of(e) for e in result.edges))
