"""Shared fixtures: small grids, seeded RNG, and a default shear."""

import numpy as np
import pytest

from pkshear.grid import Grid, Field
from pkshear.model import build_shear


@pytest.fixture
def grid_small():
    return Grid(8, 17, 8.0)


@pytest.fixture
def grid_medium():
    return Grid(16, 33, 8.0)


@pytest.fixture
def grid_default():
    return Grid(64, 257, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


@pytest.fixture
def couette_small(grid_small):
    return build_shear(grid_small, "couette")


_CRITERION_LINES: list[str] = []


def record_criterion(line: str) -> None:
    """Print a per-criterion verdict and replay it in the terminal summary,
    where it survives pytest's output capture on passing tests."""
    print(line)
    _CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)


def random_field(grid, rng, scale=1.0):
    return Field(grid, scale * rng.standard_normal((grid.nx, grid.ny)))


def bandlimited_field(grid, rng, scale=1.0):
    """Random real field with x-content inside the 2/3 dealias band."""
    vals = scale * rng.standard_normal((grid.nx, grid.ny))
    spec = np.fft.rfft(vals, axis=0, norm="forward")
    spec[~grid.dealias_keep] = 0.0
    return Field(grid, np.fft.irfft(spec, n=grid.nx, axis=0, norm="forward"))
