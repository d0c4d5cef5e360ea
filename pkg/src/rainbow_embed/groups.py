"""Finite abelian groups given by a Cayley table or by invariant factors.

Elements are always the integers ``0 .. order - 1``.  For invariant factors
``Z_m1 x ... x Z_ms`` element ``k`` is the mixed-radix number whose digits
are the coordinates, so ``Z16`` numbers its elements exactly like the
integers mod 16.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import CapExceeded, GroupError

__all__ = [
    "AbelianGroup",
    "DEFAULT_ORDER_CAP",
    "parse_group_spec",
    "load_group_table",
]

DEFAULT_ORDER_CAP = 10**6
_EXHAUSTIVE_ASSOCIATIVITY = 256


@dataclass(frozen=True, eq=False)
class AbelianGroup:
    """A finite abelian group on ``0 .. order - 1``.

    Build instances with :meth:`cyclic`, :meth:`from_invariant_factors` or
    :meth:`from_table`; the constructor itself does no validation.
    """

    order: int
    factors: tuple[int, ...] | None = None
    _table: np.ndarray | None = None
    name: str = ""

    # --------------------------------------------------------- construction
    @classmethod
    def cyclic(cls, n: int, *, cap: int = DEFAULT_ORDER_CAP) -> "AbelianGroup":
        return cls.from_invariant_factors([n], cap=cap)

    @classmethod
    def from_invariant_factors(
        cls, factors: Sequence[int], *, cap: int = DEFAULT_ORDER_CAP
    ) -> "AbelianGroup":
        fs = tuple(int(m) for m in factors)
        if not fs or any(m < 1 for m in fs):
            raise GroupError("invariant factors must be positive integers")
        order = 1
        for m in fs:
            order *= m
        if order > cap:
            raise CapExceeded(f"group order {order} exceeds the cap {cap}")
        name = "x".join(f"Z{m}" for m in fs)
        return cls(order=order, factors=fs, name=name)

    @classmethod
    def from_table(
        cls, table: Sequence[Sequence[int]] | np.ndarray, *, cap: int = DEFAULT_ORDER_CAP, seed: int = 0
    ) -> "AbelianGroup":
        """Validate a Cayley table and wrap it.

        Closure, identity, inverses (every row a permutation) and
        commutativity are checked exactly.  Associativity is checked on all
        triples up to order 256 and on 200 000 seeded random triples above.
        """
        t = np.asarray(table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise GroupError("a group table must be a non-empty square array")
        n = t.shape[0]
        if n > cap:
            raise CapExceeded(f"group order {n} exceeds the cap {cap}")
        if t.min() < 0 or t.max() >= n:
            raise GroupError("table entries must be element indices 0..n-1")
        if not np.array_equal(t, t.T):
            i, j = np.argwhere(t != t.T)[0]
            raise GroupError(f"operation is not commutative: {i}+{j} != {j}+{i}")
        ident = [e for e in range(n) if np.array_equal(t[e], np.arange(n))]
        if not ident:
            raise GroupError("no identity element")
        srt = np.sort(t, axis=1)
        if not (srt == np.arange(n)).all():
            bad = int(np.flatnonzero((srt != np.arange(n)).any(axis=1))[0])
            raise GroupError(f"row {bad} is not a permutation, so inverses fail")
        if n <= _EXHAUSTIVE_ASSOCIATIVITY:
            left = t[t, :]  # left[a, b, c] = (a+b)+c
            right = t[:, t]  # right[a, b, c] = a+(b+c)
            if not np.array_equal(left, right):
                a, b, c = np.argwhere(left != right)[0]
                raise GroupError(f"operation is not associative at ({a}, {b}, {c})")
        else:
            rng = np.random.default_rng(seed)
            a, b, c = rng.integers(0, n, size=(3, 200_000))
            bad = t[t[a, b], c] != t[a, t[b, c]]
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                raise GroupError(f"operation is not associative at ({a[k]}, {b[k]}, {c[k]})")
        t = t.copy()
        t.setflags(write=False)
        return cls(order=n, _table=t, name=f"table({n})")

    # ------------------------------------------------------------ operations
    @cached_property
    def identity(self) -> int:
        if self._table is None:
            return 0
        return int(np.flatnonzero((self._table == np.arange(self.order)).all(axis=1))[0])

    def _digits(self, a: np.ndarray) -> list[np.ndarray]:
        out = []
        for m in reversed(self.factors or ()):
            out.append(a % m)
            a = a // m
        return out[::-1]

    def _undigits(self, ds: list[np.ndarray]) -> np.ndarray:
        acc = np.zeros_like(ds[0])
        for d, m in zip(ds, self.factors or ()):
            acc = acc * m + d
        return acc

    def add(self, a, b):
        """Group sum; works elementwise on integer arrays."""
        a_arr = np.asarray(a, dtype=np.int64)
        b_arr = np.asarray(b, dtype=np.int64)
        if self._table is not None:
            out = self._table[a_arr, b_arr]
        else:
            da, db = self._digits(a_arr), self._digits(b_arr)
            out = self._undigits([(x + y) % m for x, y, m in zip(da, db, self.factors)])
        return int(out) if np.ndim(out) == 0 else out

    def neg(self, a):
        a_arr = np.asarray(a, dtype=np.int64)
        if self._table is not None:
            inv = np.argmax(self._table == self.identity, axis=1)
            out = inv[a_arr]
        else:
            out = self._undigits([(-x) % m for x, m in zip(self._digits(a_arr), self.factors)])
        return int(out) if np.ndim(out) == 0 else out

    def contains(self, a: int) -> bool:
        return 0 <= int(a) < self.order

    @cached_property
    def table(self) -> np.ndarray:
        """Full Cayley table (materialised on demand)."""
        if self._table is not None:
            return self._table
        idx = np.arange(self.order)
        t = self.add(idx[:, None], idx[None, :])
        t.setflags(write=False)
        return t

    def __repr__(self) -> str:
        return f"AbelianGroup({self.name or self.order})"


_FACTOR_RE = re.compile(r"^Z\d+(x Z\d+)*$".replace(" ", ""))


def load_group_table(path: str | os.PathLike, *, cap: int = DEFAULT_ORDER_CAP) -> AbelianGroup:
    """Read ``order n`` followed by ``n`` rows of ``n`` element indices."""
    rows: list[list[int]] = []
    n = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "order":
                    raise GroupError(f"{path}:{lineno}: expected header 'order n'")
                try:
                    n = int(parts[1])
                except ValueError:
                    raise GroupError(f"{path}:{lineno}: bad order {parts[1]!r}") from None
                if n < 1:
                    raise GroupError(f"{path}:{lineno}: order must be positive")
                if n > cap:
                    raise CapExceeded(f"group order {n} exceeds the cap {cap}")
                continue
            try:
                row = [int(x) for x in parts]
            except ValueError:
                raise GroupError(f"{path}:{lineno}: non-integer entry") from None
            if len(row) != n:
                raise GroupError(f"{path}:{lineno}: expected {n} entries, got {len(row)}")
            rows.append(row)
    if n is None:
        raise GroupError(f"{path}: missing header 'order n'")
    if len(rows) != n:
        raise GroupError(f"{path}: expected {n} rows, got {len(rows)}")
    return AbelianGroup.from_table(rows, cap=cap)


def parse_group_spec(spec: str, *, cap: int = DEFAULT_ORDER_CAP) -> AbelianGroup:
    """Accept ``Z16``, ``Z2xZ8`` (invariant factors) or a table file path."""
    s = spec.strip()
    if _FACTOR_RE.match(s):
        return AbelianGroup.from_invariant_factors([int(p[1:]) for p in s.split("x")], cap=cap)
    if os.path.exists(s):
        return load_group_table(s, cap=cap)
    raise GroupError(f"{spec!r} is neither an invariant-factor spec like 'Z2xZ8' nor a file")
