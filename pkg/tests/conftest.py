import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from aolab.spectral import FilterSpec, Grid
from aolab.synthetic import SynthSpec, generate

settings.register_profile(
    "aolab", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("aolab")

ACCEPTANCE_LINES = []


def random_field(n=8, seed=0, kmax=None, amplitude=1.0):
    grid = Grid(n)
    kmax = grid.dealias_cutoff if kmax is None else kmax
    return generate(SynthSpec("band_limited_random", kmax=kmax, seed=seed, amplitude=amplitude),
                    grid)


def sin_x_ey(n=8):
    grid = Grid(n)
    x, _, _ = grid.coordinates()
    zero = np.zeros_like(x)
    return grid, np.stack([zero, np.sin(x), zero])


@pytest.fixture
def helmholtz():
    return FilterSpec.helmholtz(0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
