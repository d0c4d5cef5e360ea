"""Candidacy graphs: admissible images for unembedded vertices, with colour sets.

A candidacy graph between ``X_i`` (target vertices) and ``V_i`` (host
vertices) is stored densely: a boolean mask plus an integer array of colour
slots, ``-1`` marking an empty slot.  The colour set of an edge ``xv`` is the
set of host colours that embedding ``x`` at ``v`` would consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["CandidacyGraph", "pad_colour_sets"]


@dataclass
class CandidacyGraph:
    """Bipartite graph ``left x right`` with a colour set on every edge.

    ``mask[i, j]`` says whether ``right[j]`` is a candidate for ``left[i]``;
    ``slots[i, j, :]`` holds its colours (``-1`` = unused slot).  Colour ids
    ``>= dummy_from`` are padding dummies.
    """

    left: np.ndarray
    right: np.ndarray
    mask: np.ndarray
    slots: np.ndarray
    dummy_from: int | None = None

    @classmethod
    def complete(cls, left: Sequence[int], right: Sequence[int], capacity: int = 0) -> "CandidacyGraph":
        left = np.asarray(left, dtype=np.int64)
        right = np.asarray(right, dtype=np.int64)
        return cls(
            left,
            right,
            np.ones((len(left), len(right)), dtype=bool),
            np.full((len(left), len(right), capacity), -1, dtype=np.int64),
        )

    # ----------------------------------------------------------------- views
    @property
    def capacity(self) -> int:
        return int(self.slots.shape[2])

    @property
    def edge_count(self) -> int:
        return int(self.mask.sum())

    def density(self) -> float:
        size = self.mask.size
        return float(self.mask.sum()) / size if size else 0.0

    def set_sizes(self) -> np.ndarray:
        """Number of colours on every (potential) edge."""
        return (self.slots >= 0).sum(axis=2)

    def colour_set(self, i: int, j: int) -> tuple[int, ...]:
        row = self.slots[i, j]
        return tuple(sorted(int(c) for c in row if c >= 0))

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, list[tuple[int, ...]]]:
        """Edges in row-major order as external ids plus their colour sets."""
        ii, jj = np.nonzero(self.mask)
        cols = [self.colour_set(i, j) for i, j in zip(ii.tolist(), jj.tolist())]
        return self.left[ii], self.right[jj], cols

    def copy(self) -> "CandidacyGraph":
        return CandidacyGraph(self.left.copy(), self.right.copy(), self.mask.copy(),
                              self.slots.copy(), self.dummy_from)

    # -------------------------------------------------------------- updates
    def ensure_capacity(self, k: int) -> None:
        if k > self.capacity:
            extra = np.full(self.slots.shape[:2] + (k - self.capacity,), -1, dtype=np.int64)
            self.slots = np.concatenate([self.slots, extra], axis=2)

    def append_colour(self, i: int, cols: np.ndarray) -> None:
        """Append ``cols[j]`` to the colour set of edge ``(i, j)`` where ``cols[j] >= 0``."""
        sizes = (self.slots[i] >= 0).sum(axis=1)
        need = int(sizes.max(initial=0)) + 1
        self.ensure_capacity(need)
        j = np.flatnonzero(cols >= 0)
        self.slots[i, j, sizes[j]] = cols[j]

    def clear_non_edges(self) -> None:
        self.slots[~self.mask] = -1


def pad_colour_sets(a: CandidacyGraph, t: int, *, first_dummy: int | None = None) -> CandidacyGraph:
    """Pad every edge's colour set to exactly ``t`` colours with fresh dummies.

    Dummies are pairwise distinct and numbered from ``first_dummy`` (default:
    one above the largest colour present), so they never collide with real
    colours.  The returned graph records ``dummy_from``.  Non-edges end up
    with empty slots.
    """
    sizes = a.set_sizes()
    if (sizes[a.mask] > t).any():
        raise ValueError(f"a colour set already has more than t = {t} colours")
    if first_dummy is None:
        first_dummy = int(a.slots.max(initial=-1)) + 1
    out = a.copy()
    out.ensure_capacity(t)
    out.slots = out.slots[:, :, : max(t, int(sizes.max(initial=0)))].copy()
    if out.slots.shape[2] < t:
        out.ensure_capacity(t)
    ii, jj = np.nonzero(a.mask)
    next_id = first_dummy
    for i, j in zip(ii.tolist(), jj.tolist()):
        k = int(sizes[i, j])
        if k < t:
            # Compact real colours to the front, then fill the rest.
            real = [c for c in out.slots[i, j] if c >= 0]
            row = real + list(range(next_id, next_id + t - k))
            next_id += t - k
            out.slots[i, j, :] = -1
            out.slots[i, j, : len(row)] = row
    out.clear_non_edges()
    out.dummy_from = first_dummy
    return out
