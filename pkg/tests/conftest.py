import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from acopt.adjoint import Tracking
from acopt.forward import AllenCahn
from acopt.grid import SpatialGrid, TimeGrid
from acopt.potentials import DoubleWell
from acopt.profiles import circle
from acopt.reduced import ReducedProblem

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

EPS_REF = 1.0 / (14.0 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def keep_circle_problem(n=32, M=20, T=0.005, scheme="implicit", adjoint_scheme=None):
    grid = SpatialGrid.square(-1.0, 1.0, n)
    system = AllenCahn(grid, TimeGrid(T, M), EPS_REF, DoubleWell())
    c0 = circle(grid, EPS_REF, r=0.5)
    tracking = Tracking(nu_T=1.0, nu_d=0.0, nu_f=0.01, c_T=c0)
    return ReducedProblem(system, tracking, c0, scheme, adjoint_scheme)


@pytest.fixture
def small_problem():
    return keep_circle_problem(n=16, M=6, T=0.0015)


ACCEPTANCE_LINES: list[str] = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    """Record one acceptance line (printed at the end of the run) and assert it."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
