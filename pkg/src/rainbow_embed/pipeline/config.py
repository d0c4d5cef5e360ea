"""Pipeline configuration."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

__all__ = ["PipelineConfig", "default_eps_schedule", "thread_count"]

THREADS_ENV = "RAINBOW_EMBED_THREADS"


def default_eps_schedule(r: int, top: float = 0.5) -> tuple[float, ...]:
    """Geometric schedule ``eps_t = top / 2^(r + 1 - t)`` for ``t = 0 .. r + 1``."""
    return tuple(top / 2 ** (r + 1 - t) for t in range(r + 2))


def thread_count() -> int:
    """Worker threads for parallel retries: ``$RAINBOW_EMBED_THREADS`` or 1."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


_CHOICES = {
    "transform_policy": ("auto", "always", "never"),
    "layer_policy": ("auto", "strict", "relaxed"),
    "nibble_mode": ("greedy", "nibble"),
}


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the embedding pipeline, with desk-scale defaults.

    ``eps_schedule`` is ``eps_0 < ... < eps_{r+1}``; when ``None`` it is
    derived from the cluster count by :func:`default_eps_schedule`, and a
    schedule of the wrong length is rescaled onto ``r + 2`` points.
    ``retries`` bounds whole-pipeline attempts, ``round_retries`` the
    re-matching attempts inside one round, ``completion_restarts`` the
    reservoir restarts and ``search_nodes`` the backtracking budget of one
    completion attempt.
    """

    gamma: float = 0.1
    mu: float = 0.05
    eps_schedule: tuple[float, ...] | None = None
    retries: int = 8
    rng_seed: int = 0
    nibble_mode: str = "greedy"
    theta: float = 0.1
    round_retries: int = 3
    strict_rounds: bool = False
    codegree_cap: int | None = None
    transform_policy: str = "auto"
    transform_retries: int = 50
    layer_policy: str = "auto"
    completion_restarts: int = 6
    search_nodes: int = 20_000
    partition_retries: int = 20
    balance_tol: float = 1.0
    gate_eps: float = 0.1
    sample_count: int = 32
    weight_colours: int = 8
    app_slack: float = 0.1
    force: bool = False

    def __post_init__(self):
        if self.eps_schedule is not None:
            object.__setattr__(self, "eps_schedule", tuple(float(e) for e in self.eps_schedule))
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not 0 < self.gamma <= 1:
            out.append("gamma must lie in (0, 1]")
        if not 0 < self.mu < self.gamma:
            out.append("mu must satisfy 0 < mu < gamma")
        if self.eps_schedule is not None:
            s = self.eps_schedule
            if len(s) < 2 or any(b <= a for a, b in zip(s, s[1:])):
                out.append("eps_schedule must be strictly increasing with at least two entries")
            elif s[0] <= 0 or s[-1] > 1:
                out.append("eps_schedule entries must lie in (0, 1]")
        for name in ("retries", "round_retries", "completion_restarts", "search_nodes",
                     "partition_retries", "transform_retries", "sample_count"):
            if getattr(self, name) < 1:
                out.append(f"{name} must be at least 1")
        if self.weight_colours < 0:
            out.append("weight_colours must be non-negative")
        if not 0 < self.theta <= 1:
            out.append("theta must lie in (0, 1]")
        if not 0 < self.gate_eps <= 1:
            out.append("gate_eps must lie in (0, 1]")
        if not 0 <= self.app_slack < 1:
            out.append("app_slack must lie in [0, 1)")
        if self.codegree_cap is not None and self.codegree_cap < 1:
            out.append("codegree_cap must be positive")
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                out.append(f"{name} must be one of {', '.join(allowed)}")
        return out

    # ------------------------------------------------------------- helpers
    def schedule(self, r: int) -> tuple[float, ...]:
        """The ``r + 2`` tolerances ``eps_0 .. eps_{r+1}`` used for ``r`` clusters."""
        if self.eps_schedule is None:
            return default_eps_schedule(r)
        s = self.eps_schedule
        if len(s) == r + 2:
            return s
        # Interpolate geometrically between the given end points.
        lo, hi = s[0], s[-1]
        return tuple(lo * (hi / lo) ** (t / (r + 1)) for t in range(r + 2))

    def replace(self, **changes: Any) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["eps_schedule"] is not None:
            out["eps_schedule"] = list(out["eps_schedule"])
        return out

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base: "PipelineConfig | None" = None) -> "PipelineConfig":
        """Overlay ``data`` on ``base`` (default: the defaults); unknown keys are errors."""
        base = base or cls()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown configuration keys: {', '.join(unknown)}")
        changes = dict(data)
        if changes.get("eps_schedule") is not None:
            changes["eps_schedule"] = tuple(changes["eps_schedule"])
        return base.replace(**changes)


def parse_eps_schedule(text: str) -> tuple[float, ...]:
    """Parse ``"0.01,0.02,0.04"`` into a tuple of floats."""
    parts: Sequence[str] = [p for p in text.replace(" ", "").split(",") if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ValueError(f"bad eps schedule {text!r}") from None
