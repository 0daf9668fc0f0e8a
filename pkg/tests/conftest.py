from pathlib import Path

import numpy as np
import pytest

from sgbandit.environments import CoverageEnv, CoverageInstance, read_edge_list

ROOT = Path(__file__).resolve().parent.parent
SOCIAL_GRAPH = ROOT / "data" / "social_534.edges"


def modular_env(weights):
    """Noiseless modular coverage: arm a deterministically covers weights[a] own elements."""
    total = sum(weights)
    p = np.zeros((len(weights), total))
    col = 0
    for a, w in enumerate(weights):
        p[a, col : col + w] = 1.0
        col += w
    return CoverageEnv(CoverageInstance(p))


@pytest.fixture(scope="session")
def social_graph():
    return read_edge_list(SOCIAL_GRAPH)


# acceptance criteria append (number, passed, detail) here; printed after the run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
