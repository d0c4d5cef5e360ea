"""Exception hierarchy shared by the library and the command-line front end.

The CLI maps these onto exit codes: format problems exit with 2, rejected
feasibility gates with 3 and exhausted retry budgets with 4.
"""

from __future__ import annotations

from typing import Any


class RainbowEmbedError(Exception):
    """Base class for every error raised deliberately by this package."""


class GraphFormatError(RainbowEmbedError, ValueError):
    """An input file (graph or group table) does not match its grammar."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class ParseError(GraphFormatError):
    """A line could not be parsed."""


class DuplicateEdgeError(GraphFormatError):
    """The same unordered vertex pair appears twice."""


class SelfLoopError(GraphFormatError):
    """An edge joins a vertex to itself."""


class GroupError(RainbowEmbedError, ValueError):
    """A group table or invariant-factor description is invalid."""


class InstanceError(RainbowEmbedError, ValueError):
    """A blow-up instance or partition violates its structural invariants."""


class PartitionError(InstanceError):
    """Vertex sets that overlap or fail to match the expected sizes."""


class GateError(RainbowEmbedError):
    """A feasibility gate rejected the input before any embedding was tried.

    ``report`` carries the evidence (for example the per-colour boundedness
    table) so callers can show why the gate fired.
    """

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class RetriesExhausted(RainbowEmbedError):
    """A randomized stage failed on every seed of its retry budget.

    ``stage`` names the failing stage and ``details`` records the last
    diagnostic (the failing clause and its counters).
    """

    def __init__(self, stage: str, message: str, details: Any = None):
        self.stage = stage
        self.details = details
        super().__init__(f"[{stage}] {message}")


class TransformError(RetriesExhausted):
    """The colour-split or refinement transform could not meet its post-checks."""

    def __init__(self, clause: str, message: str, details: Any = None):
        self.clause = clause
        super().__init__("transform", f"{clause}: {message}", details)


class PruneBudgetError(RetriesExhausted):
    """Pruning would remove more than the configured fraction of a graph."""

    def __init__(self, message: str, details: Any = None):
        super().__init__("prune", message, details)


class CapExceeded(RainbowEmbedError):
    """A bounded enumeration (search nodes, group order) hit its cap."""


class VerificationError(RainbowEmbedError, AssertionError):
    """An internal result failed independent verification; indicates a bug."""
