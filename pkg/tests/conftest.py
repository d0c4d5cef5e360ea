import os

import pytest
from hypothesis import HealthCheck, settings

from rainbow_embed.graphcore import ColouredGraph

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=150, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def complete_graph(n: int, colours=None) -> ColouredGraph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if colours == "rainbow":
        colours = list(range(len(edges)))
    elif colours == "mono":
        colours = [0] * len(edges)
    return ColouredGraph(n, edges, colours)


def complete_bipartite(a: int, b: int, colours=None) -> ColouredGraph:
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    if colours == "rainbow":
        colours = list(range(len(edges)))
    elif colours == "mono":
        colours = [0] * len(edges)
    return ColouredGraph(a + b, edges, colours)


@pytest.fixture
def k5_distance() -> ColouredGraph:
    edges = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    return ColouredGraph(5, edges, [min(j - i, 5 - (j - i)) for i, j in edges])


# Acceptance verdicts, printed together at the end of the run.
ACCEPTANCE: dict[int, str] = {}


def report_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
