import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

from krnav.potential import QuadraticObjective
from krnav.world import EggObstacle, EllipsoidObstacle, Workspace, WorldModel

# (criterion, passed, detail) lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def fd_gradient(fn, x, h):
    """Fourth-order central differences."""
    g = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (-fn(x + 2 * e) + 8 * fn(x + e) - 8 * fn(x - e) + fn(x - 2 * e)) / (12 * h)
    return g


@pytest.fixture
def mixed_world():
    """Workspace of radius 10 holding one ellipse and one horizontal egg."""
    return WorldModel(
        Workspace(np.zeros(2), 10.0),
        [
            EllipsoidObstacle([3.0, 1.0], [[2.0, 0.5], [0.5, 1.0]], 1.5),
            EggObstacle([-4.0, -2.0], 1.0, "horizontal"),
        ],
    )


@pytest.fixture
def mixed_objective():
    return QuadraticObjective([[1.0, 0.2], [0.2, 2.0]], [0.5, -3.0])


@pytest.fixture
def circle_world():
    """A radius-2 circle centred at (-4, 0) in a radius-20 workspace."""
    return WorldModel(Workspace(np.zeros(2), 20.0), [EllipsoidObstacle([-4.0, 0.0], np.eye(2), 2.0)])
