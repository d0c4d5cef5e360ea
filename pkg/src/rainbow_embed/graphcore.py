"""Edge-coloured graphs with their statistics and blow-up instance bookkeeping.

A :class:`ColouredGraph` is an immutable simple graph whose edges carry sets
of integer colour ids.  Host graphs read from files carry exactly one colour
per edge; target graphs may be uncoloured.  External colour tokens (integers
or strings) are interned into dense ids in sorted token order, so a graph
written with :func:`save_coloured_graph` and read back is identical.
"""

from __future__ import annotations

import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateEdgeError,
    InstanceError,
    ParseError,
    PartitionError,
    SelfLoopError,
)

__all__ = [
    "ColouredGraph",
    "GraphBuilder",
    "ColouringStats",
    "BlowUpInstance",
    "ColourBound",
    "BoundednessReport",
    "load_coloured_graph",
    "parse_coloured_graph",
    "save_coloured_graph",
    "format_coloured_graph",
    "colouring_stats",
    "is_colour_split",
    "boundedness_condition",
    "partition_labels",
    "label_sort_key",
    "atomic_write_text",
    "colour_pair_matrix",
]


def label_sort_key(label: Hashable) -> tuple:
    """Order colour labels with integers first (numerically), then strings."""
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        return (0, int(label), "")
    return (1, 0, str(label))


class ColouredGraph:
    """Immutable simple graph with a set of colour ids on every edge.

    Parameters
    ----------
    vertex_count:
        Number of vertices; vertices are ``0 .. vertex_count - 1``.
    edges:
        Iterable of vertex pairs.  Orientation does not matter.
    colours:
        Optional iterable, parallel to ``edges``, of colour ids.  Each entry
        may be a single ``int`` or an iterable of ints.  ``None`` leaves all
        edges uncoloured.
    labels:
        Optional sequence mapping colour id to its external label.  Defaults
        to the identity.  Labels are what files show and what equality
        compares.

    Self-loops and repeated pairs raise :class:`SelfLoopError` and
    :class:`DuplicateEdgeError`.
    """

    __slots__ = (
        "_n",
        "_edges",
        "_edge_colours",
        "_eid",
        "_adj",
        "_colour_index",
        "_labels",
        "__dict__",
    )

    def __init__(
        self,
        vertex_count: int,
        edges: Iterable[Sequence[int]] = (),
        colours: Iterable[int | Iterable[int]] | None = None,
        labels: Sequence[Hashable] | None = None,
    ):
        n = int(vertex_count)
        if n < 0:
            raise ValueError("vertex_count must be non-negative")
        edge_list = [(int(e[0]), int(e[1])) for e in edges]
        if colours is None:
            colour_list: list[tuple[int, ...]] = [()] * len(edge_list)
        else:
            colour_list = []
            for c in colours:
                if isinstance(c, (int, np.integer)):
                    colour_list.append((int(c),))
                else:
                    colour_list.append(tuple(sorted({int(a) for a in c})))
            if len(colour_list) != len(edge_list):
                raise ValueError("colours must be parallel to edges")

        keyed = []
        for (u, v), cs in zip(edge_list, colour_list):
            if u == v:
                raise SelfLoopError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has a vertex outside 0..{n - 1}")
            if u > v:
                u, v = v, u
            keyed.append(((u, v), cs))
        keyed.sort(key=lambda item: item[0])
        for a, b in zip(keyed, keyed[1:]):
            if a[0] == b[0]:
                raise DuplicateEdgeError(f"duplicate edge {a[0][0]} {a[0][1]}")

        self._n = n
        arr = np.array([k for k, _ in keyed], dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        self._edges = arr
        self._edge_colours = tuple(cs for _, cs in keyed)
        self._eid = {k: i for i, (k, _) in enumerate(keyed)}
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in self._eid:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self._adj = tuple(tuple(sorted(x)) for x in nbrs)
        index: dict[int, list[int]] = {}
        for i, cs in enumerate(self._edge_colours):
            for a in cs:
                index.setdefault(a, []).append(i)
        self._colour_index = {a: tuple(ids) for a, ids in sorted(index.items())}
        if labels is None:
            self._labels = None
        else:
            self._labels = tuple(labels)
            if self._colour_index and max(self._colour_index) >= len(self._labels):
                raise ValueError("labels do not cover every colour id")

    # ------------------------------------------------------------------ basics
    @property
    def vertex_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._edge_colours)

    @property
    def edges(self) -> np.ndarray:
        """Read-only ``(m, 2)`` array of edges in canonical order."""
        return self._edges

    def edge_list(self) -> list[tuple[int, int]]:
        return list(self._eid)

    def iter_edges(self) -> Iterator[tuple[int, int, tuple[int, ...]]]:
        for (u, v), cs in zip(self._eid, self._edge_colours):
            yield u, v, cs

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adj

    def neighbours(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.fromiter((len(a) for a in self._adj), dtype=np.int64, count=self._n)
        d.setflags(write=False)
        return d

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self._n else 0

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._eid

    def edge_id(self, u: int, v: int) -> int:
        return self._eid[(u, v) if u < v else (v, u)]

    def colours_of(self, u: int, v: int) -> tuple[int, ...]:
        """Colour set of edge ``uv``; ``KeyError`` if it is not an edge."""
        return self._edge_colours[self.edge_id(u, v)]

    def colour(self, u: int, v: int) -> int:
        """The single colour of edge ``uv`` (host graphs only)."""
        cs = self.colours_of(u, v)
        if len(cs) != 1:
            raise ValueError(f"edge ({u}, {v}) carries {len(cs)} colours, expected 1")
        return cs[0]

    @property
    def edge_colours(self) -> tuple[tuple[int, ...], ...]:
        """Colour sets parallel to :attr:`edges`."""
        return self._edge_colours

    @property
    def colour_index(self) -> Mapping[int, tuple[int, ...]]:
        """Map colour id to the ids of the edges carrying it."""
        return self._colour_index

    @property
    def colours(self) -> tuple[int, ...]:
        return tuple(self._colour_index)

    @property
    def labels(self) -> tuple[Hashable, ...] | None:
        return self._labels

    def label_of(self, colour: int) -> Hashable:
        if self._labels is None:
            return colour
        return self._labels[colour]

    def colour_count(self, colour: int) -> int:
        return len(self._colour_index.get(colour, ()))

    @cached_property
    def single_coloured(self) -> bool:
        """True when every edge carries exactly one colour."""
        return all(len(cs) == 1 for cs in self._edge_colours)

    @cached_property
    def colour_bound(self) -> int:
        """One more than the largest colour id in use (0 if uncoloured)."""
        return (max(self._colour_index) + 1) if self._colour_index else 0

    # -------------------------------------------------------------- matrices
    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix (read-only)."""
        m = np.zeros((self._n, self._n), dtype=bool)
        if len(self._edges):
            m[self._edges[:, 0], self._edges[:, 1]] = True
            m[self._edges[:, 1], self._edges[:, 0]] = True
        m.setflags(write=False)
        return m

    @cached_property
    def colour_matrix(self) -> np.ndarray:
        """Dense matrix of single colours, ``-1`` on non-edges.

        Only defined when no edge carries more than one colour.
        """
        if any(len(cs) > 1 for cs in self._edge_colours):
            raise ValueError("colour_matrix needs at most one colour per edge")
        m = np.full((self._n, self._n), -1, dtype=np.int64)
        if len(self._edges):
            cols = np.array([cs[0] if cs else -1 for cs in self._edge_colours], dtype=np.int64)
            m[self._edges[:, 0], self._edges[:, 1]] = cols
            m[self._edges[:, 1], self._edges[:, 0]] = cols
        m.setflags(write=False)
        return m

    @cached_property
    def edge_colour_array(self) -> np.ndarray:
        """Single colour per edge as an array (``-1`` for uncoloured edges)."""
        if any(len(cs) > 1 for cs in self._edge_colours):
            raise ValueError("edge_colour_array needs at most one colour per edge")
        a = np.array([cs[0] if cs else -1 for cs in self._edge_colours], dtype=np.int64)
        a.setflags(write=False)
        return a

    # ------------------------------------------------------------ derivation
    def edge_subgraph(self, edge_ids: Iterable[int]) -> "ColouredGraph":
        """Spanning subgraph on the given edge ids, keeping colour ids."""
        ids = sorted(set(int(i) for i in edge_ids))
        return ColouredGraph(
            self._n,
            (tuple(self._edges[i]) for i in ids),
            [self._edge_colours[i] for i in ids],
            self._labels,
        )

    def relabel(self, perm: Sequence[int]) -> "ColouredGraph":
        """Copy with vertex ``v`` renamed ``perm[v]``; colours unchanged."""
        p = [int(x) for x in perm]
        if sorted(p) != list(range(self._n)):
            raise ValueError("perm must be a permutation of the vertices")
        return ColouredGraph(
            self._n,
            ((p[u], p[v]) for u, v in self._eid),
            self._edge_colours,
            self._labels,
        )

    def padded(self, vertex_count: int) -> "ColouredGraph":
        """Copy with isolated vertices appended up to ``vertex_count``."""
        if vertex_count < self._n:
            raise ValueError("cannot pad to fewer vertices")
        return ColouredGraph(vertex_count, self._eid, self._edge_colours, self._labels)

    def recoloured(
        self, colours: Sequence[int | Iterable[int]], labels: Sequence[Hashable] | None = None
    ) -> "ColouredGraph":
        """Same edges (canonical order) with new colour sets."""
        return ColouredGraph(self._n, self._eid, colours, labels)

    def uncoloured(self) -> "ColouredGraph":
        return ColouredGraph(self._n, self._eid)

    # --------------------------------------------------------------- dunder
    def _label_sets(self) -> tuple:
        return tuple(tuple(sorted((self.label_of(a) for a in cs), key=label_sort_key))
                     for cs in self._edge_colours)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ColouredGraph):
            return NotImplemented
        return (
            self._n == other._n
            and tuple(self._eid) == tuple(other._eid)
            and self._label_sets() == other._label_sets()
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (f"ColouredGraph(vertices={self._n}, edges={self.edge_count}, "
                f"colours={len(self._colour_index)})")


class GraphBuilder:
    """Mutable accumulator for :class:`ColouredGraph`.

    Colours are given as external labels and interned on :meth:`build`.
    """

    def __init__(self, vertex_count: int = 0):
        self.vertex_count = vertex_count
        self._edges: dict[tuple[int, int], tuple[Hashable, ...]] = {}

    def add_vertex(self) -> int:
        self.vertex_count += 1
        return self.vertex_count - 1

    def add_edge(self, u: int, v: int, colours: Hashable | Iterable[Hashable] = ()) -> None:
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}")
        key = (u, v) if u < v else (v, u)
        if key in self._edges:
            raise DuplicateEdgeError(f"duplicate edge {key[0]} {key[1]}")
        if isinstance(colours, (str, int, np.integer)):
            cs: tuple[Hashable, ...] = (colours,)
        else:
            cs = tuple(colours)
        self._edges[key] = cs
        self.vertex_count = max(self.vertex_count, key[1] + 1)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edges

    def build(self) -> ColouredGraph:
        return _intern(self.vertex_count, list(self._edges.items()))


def _intern(n: int, items: list[tuple[tuple[int, int], tuple[Hashable, ...]]]) -> ColouredGraph:
    labels = sorted({lab for _, cs in items for lab in cs}, key=label_sort_key)
    ids = {lab: i for i, lab in enumerate(labels)}
    return ColouredGraph(
        n,
        (k for k, _ in items),
        [[ids[lab] for lab in cs] for _, cs in items],
        labels,
    )


# ---------------------------------------------------------------- file I/O
def _parse_token(tok: str) -> Hashable:
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_coloured_graph(
    text: str, *, require_colours: bool = True, source: str | None = None
) -> ColouredGraph:
    """Parse the edge-list text format.

    The first non-comment line is ``vertices N``; every further line is
    ``u v colour``.  With ``require_colours=False`` the colour token may be
    omitted, which is how uncoloured target graphs are stored.
    """
    n: int | None = None
    items: list[tuple[tuple[int, int], tuple[Hashable, ...]]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "vertices":
                raise ParseError("expected header 'vertices N'", lineno, source)
            try:
                n = int(parts[1])
            except ValueError:
                raise ParseError(f"bad vertex count {parts[1]!r}", lineno, source) from None
            if n < 0:
                raise ParseError("vertex count must be non-negative", lineno, source)
            continue
        if len(parts) == 2 and not require_colours:
            colour: tuple[Hashable, ...] = ()
        elif len(parts) == 3:
            colour = (_parse_token(parts[2]),)
        else:
            want = "'u v colour'" if require_colours else "'u v [colour]'"
            raise ParseError(f"expected {want}, got {line!r}", lineno, source)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"vertex ids must be integers: {line!r}", lineno, source) from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex out of range 0..{n - 1}: {line!r}", lineno, source)
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}", lineno, source)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {key[0]} {key[1]}", lineno, source)
        seen.add(key)
        items.append((key, colour))
    if n is None:
        raise ParseError("missing header 'vertices N'", None, source)
    return _intern(n, items)


def load_coloured_graph(path: str | os.PathLike, *, require_colours: bool = True) -> ColouredGraph:
    """Read a graph file; see :func:`parse_coloured_graph` for the grammar."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_coloured_graph(text, require_colours=require_colours, source=str(path))


def format_coloured_graph(g: ColouredGraph) -> str:
    lines = [f"vertices {g.vertex_count}"]
    for u, v, cs in g.iter_edges():
        if len(cs) > 1:
            raise ValueError("the edge-list format stores at most one colour per edge")
        if cs:
            label = str(g.label_of(cs[0]))
            if not label or any(ch.isspace() for ch in label) or label.startswith("#"):
                raise ValueError(f"colour label {label!r} cannot be written as a token")
            lines.append(f"{u} {v} {label}")
        else:
            lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_coloured_graph(g: ColouredGraph, path: str | os.PathLike) -> None:
    """Write ``g`` in canonical edge order (atomic)."""
    atomic_write_text(path, format_coloured_graph(g))


# ------------------------------------------------------------ statistics
@dataclass(frozen=True)
class ColouringStats:
    """Exact colour aggregates of a graph.

    ``global_max`` is the largest colour class, ``local_max`` the largest
    degree inside a single colour class, ``codegree`` the largest number of
    edges sharing a fixed pair of colours, and ``split_violations`` the
    number of colours that occur in more than one pair of the partition
    passed to :func:`colouring_stats` (0 without a partition).
    """

    global_max: int
    local_max: int
    codegree: int
    split_violations: int = 0


def partition_labels(n: int, parts: Sequence[Iterable[int]], *, cover: bool = True) -> np.ndarray:
    """Array mapping each vertex to the index of its part (``-1`` if none).

    Raises :class:`PartitionError` on overlapping parts, or when ``cover`` is
    set and some vertex lies in no part.
    """
    lab = np.full(n, -1, dtype=np.int64)
    for i, part in enumerate(parts):
        for v in part:
            v = int(v)
            if not 0 <= v < n:
                raise PartitionError(f"vertex {v} is not a vertex of the graph")
            if lab[v] != -1:
                raise PartitionError(f"vertex {v} lies in parts {lab[v]} and {i}")
            lab[v] = i
    if cover and (lab < 0).any():
        missing = int(np.flatnonzero(lab < 0)[0])
        raise PartitionError(f"vertex {missing} is not covered by the parts")
    return lab


def _colour_pair_classes(g: ColouredGraph, lab: np.ndarray) -> dict[int, set[tuple[int, int]]]:
    classes: dict[int, set[tuple[int, int]]] = {}
    for (u, v), cs in zip(g.edge_list(), g.edge_colours):
        a, b = int(lab[u]), int(lab[v])
        key = (a, b) if a <= b else (b, a)
        for c in cs:
            classes.setdefault(c, set()).add(key)
    return classes


def colouring_stats(g: ColouredGraph, parts: Sequence[Iterable[int]] | None = None) -> ColouringStats:
    """Compute :class:`ColouringStats` exactly."""
    global_max = max((len(ids) for ids in g.colour_index.values()), default=0)
    local = Counter()
    pairs = Counter()
    for (u, v), cs in zip(g.edge_list(), g.edge_colours):
        for c in cs:
            local[(u, c)] += 1
            local[(v, c)] += 1
        if len(cs) > 1:
            for p in combinations(cs, 2):
                pairs[p] += 1
    split = 0
    if parts is not None:
        lab = partition_labels(g.vertex_count, parts)
        split = sum(1 for s in _colour_pair_classes(g, lab).values() if len(s) > 1)
    return ColouringStats(
        global_max=global_max,
        local_max=max(local.values(), default=0),
        codegree=max(pairs.values(), default=0),
        split_violations=split,
    )


def is_colour_split(g: ColouredGraph, parts: Sequence[Iterable[int]]) -> bool:
    """True iff no colour occurs in two different pairs of ``parts``.

    Edges inside a part count as their own pair class, so a colour used both
    inside ``V_1`` and between ``V_1`` and ``V_2`` is a violation.
    """
    lab = partition_labels(g.vertex_count, parts)
    return all(len(s) <= 1 for s in _colour_pair_classes(g, lab).values())


# -------------------------------------------------------- blow-up instances
def _as_parts(parts: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(sorted(int(v) for v in p)) for p in parts)


@dataclass(frozen=True)
class BlowUpInstance:
    """Target ``H``, host ``G`` and matching partitions ``X`` and ``V``.

    ``eps`` and ``d`` are the regularity parameters, ``Delta`` bounds the
    maximum degree of ``H``, ``Lambda`` the local boundedness of the colouring
    of ``G`` and ``gamma`` is the slack in the boundedness condition.
    ``Delta`` and ``Lambda`` default to the measured values.

    Construction validates the invariants: both partitions cover their
    graphs, ``|X_i| = |V_i|``, every ``X_i`` is independent in ``H``, and the
    degree and local-boundedness caps hold.  Pass ``validate=False`` only for
    intermediate objects that are checked later.
    """

    H: ColouredGraph
    G: ColouredGraph
    X: tuple[tuple[int, ...], ...]
    V: tuple[tuple[int, ...], ...]
    eps: float = 0.1
    d: float = 0.5
    Delta: int | None = None
    Lambda: int | None = None
    gamma: float = 0.1
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "X", _as_parts(self.X))
        object.__setattr__(self, "V", _as_parts(self.V))
        if self.Delta is None:
            object.__setattr__(self, "Delta", self.H.max_degree)
        if self.Lambda is None:
            object.__setattr__(self, "Lambda", colouring_stats(self.G).local_max)
        if self.validate:
            problems = self.problems()
            if problems:
                raise InstanceError("; ".join(problems))

    def problems(self) -> list[str]:
        """List every violated structural invariant (empty when valid)."""
        out = []
        if len(self.X) != len(self.V):
            out.append(f"{len(self.X)} H-clusters but {len(self.V)} G-clusters")
        try:
            partition_labels(self.H.vertex_count, self.X)
        except PartitionError as exc:
            out.append(f"X is not a partition of V(H): {exc}")
        try:
            partition_labels(self.G.vertex_count, self.V)
        except PartitionError as exc:
            out.append(f"V is not a partition of V(G): {exc}")
        for i, (x, v) in enumerate(zip(self.X, self.V)):
            if len(x) != len(v):
                out.append(f"|X_{i}| = {len(x)} differs from |V_{i}| = {len(v)}")
            xs = set(x)
            for a in x:
                bad = [b for b in self.H.neighbours(a) if b in xs]
                if bad:
                    out.append(f"X_{i} is not independent: edge {a} {bad[0]}")
                    break
        if self.H.max_degree > self.Delta:
            out.append(f"Delta(H) = {self.H.max_degree} exceeds Delta = {self.Delta}")
        lam = colouring_stats(self.G).local_max
        if lam > self.Lambda:
            out.append(f"colouring is locally {lam}-bounded, above Lambda = {self.Lambda}")
        if not 0 < self.eps <= 1:
            out.append("eps must lie in (0, 1]")
        if not 0 <= self.d <= 1:
            out.append("d must lie in [0, 1]")
        if not 0 < self.gamma <= 1:
            out.append("gamma must lie in (0, 1]")
        return out

    @property
    def r(self) -> int:
        return len(self.X)

    @property
    def cluster_sizes(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.X)

    @property
    def n(self) -> float:
        """Mean cluster size, the ``n`` of ``|V_i| = (1 +- eps) n``."""
        return sum(self.cluster_sizes) / max(1, self.r)

    @cached_property
    def h_cluster(self) -> np.ndarray:
        return partition_labels(self.H.vertex_count, self.X, cover=False)

    @cached_property
    def g_cluster(self) -> np.ndarray:
        return partition_labels(self.G.vertex_count, self.V, cover=False)

    @cached_property
    def h_pair_counts(self) -> np.ndarray:
        """Symmetric ``r x r`` matrix of ``e_H(X_i, X_j)``."""
        return _pair_counts(self.H, self.h_cluster, self.r)

    @cached_property
    def g_pair_counts(self) -> np.ndarray:
        """Symmetric ``r x r`` matrix of ``e_G(V_i, V_j)``."""
        return _pair_counts(self.G, self.g_cluster, self.r)

    def replace(self, **changes: Any) -> "BlowUpInstance":
        data = {
            "H": self.H, "G": self.G, "X": self.X, "V": self.V, "eps": self.eps,
            "d": self.d, "Delta": self.Delta, "Lambda": self.Lambda, "gamma": self.gamma,
            "validate": self.validate,
        }
        data.update(changes)
        return BlowUpInstance(**data)


def _pair_counts(g: ColouredGraph, lab: np.ndarray, r: int) -> np.ndarray:
    m = np.zeros((r, r), dtype=np.int64)
    if g.edge_count:
        a = lab[g.edges[:, 0]]
        b = lab[g.edges[:, 1]]
        ok = (a >= 0) & (b >= 0) & (a != b)
        np.add.at(m, (a[ok], b[ok]), 1)
        m = m + m.T
    return m


@dataclass(frozen=True)
class ColourBound:
    """One row of the boundedness table."""

    colour: int
    label: Hashable
    value: int
    passed: bool


@dataclass(frozen=True)
class BoundednessReport:
    """Per-colour values of ``sum_ij e^a_G(V_i,V_j) e_H(X_i,X_j)``.

    ``limit`` is ``(1 - gamma) d n^2`` and ``passed`` is true iff every
    colour is within it.
    """

    limit: float
    rows: tuple[ColourBound, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> tuple[ColourBound, ...]:
        return tuple(row for row in self.rows if not row.passed)

    @property
    def worst(self) -> ColourBound | None:
        return max(self.rows, key=lambda row: (row.value, -row.colour), default=None)

    @property
    def worst_ratio(self) -> float:
        w = self.worst
        if w is None or w.value == 0:
            return 0.0
        return w.value / self.limit if self.limit > 0 else float("inf")

    def as_dict(self) -> dict:
        return {
            "limit": self.limit,
            "passed": self.passed,
            "worst_ratio": round(self.worst_ratio, 12),
            "failures": [
                {"colour": str(row.label), "value": row.value} for row in self.failures
            ],
        }


def colour_pair_matrix(g: ColouredGraph, lab: np.ndarray, r: int) -> np.ndarray:
    """Array ``M[a, i, j]`` of ``e^a_G(V_i, V_j)`` for ``i < j`` (upper triangle)."""
    m = np.zeros((g.colour_bound, r, r), dtype=np.int64)
    for (u, v), cs in zip(g.edge_list(), g.edge_colours):
        a, b = int(lab[u]), int(lab[v])
        if a < 0 or b < 0 or a == b:
            continue
        if a > b:
            a, b = b, a
        for c in cs:
            m[c, a, b] += 1
    return m


def boundedness_condition(inst: BlowUpInstance, n: float | None = None) -> BoundednessReport:
    """Evaluate the per-colour boundedness condition of a blow-up instance.

    For each colour ``a`` of ``G`` the value
    ``sum_{i<j} e^a_G(V_i,V_j) * e_H(X_i,X_j)`` is compared with
    ``(1 - gamma) * d * n**2``.  ``n`` defaults to the mean cluster size.
    """
    if n is None:
        n = inst.n
    limit = (1 - inst.gamma) * inst.d * float(n) ** 2
    eh = np.triu(inst.h_pair_counts, 1)
    g = inst.G
    values = np.zeros(g.colour_bound, dtype=np.int64)
    if g.edge_count and g.colour_bound:
        lab = inst.g_cluster
        a = lab[g.edges[:, 0]]
        b = lab[g.edges[:, 1]]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        ok = (lo >= 0) & (lo != hi)
        w = np.zeros(len(a), dtype=np.int64)
        w[ok] = eh[lo[ok], hi[ok]]
        for eid, cs in enumerate(g.edge_colours):
            if w[eid]:
                for c in cs:
                    values[c] += w[eid]
    rows = tuple(
        ColourBound(c, g.label_of(c), int(values[c]), bool(values[c] <= limit + 1e-9))
        for c in g.colours
    )
    return BoundednessReport(limit=limit, rows=rows)
