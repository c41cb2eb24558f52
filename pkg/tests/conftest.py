import numpy as np
import pytest

from trivalent.fixtures import polyhedron
from trivalent.graph import build_surface

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def perturbed(surface, rng, amount=0.05):
    """Random displacement of every vertex by ``amount`` times the mean edge length."""
    scale = float(np.mean(surface.edge_lengths()))
    pos = surface.positions + amount * scale * rng.standard_normal(surface.positions.shape)
    return build_surface(surface.graph, pos, surface.lattice)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cube():
    return polyhedron("hexahedron", 1.0)


@pytest.fixture(scope="session")
def mackay():
    from trivalent.fixtures import mackay_standard

    return mackay_standard()
