import functools

import pytest
from hypothesis import HealthCheck, settings

from pinstop.params import GridSpec, ModelParams
from pinstop.vi_solver import solve

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def cached_surface(a: float, pi: float, nx: int = 801, nt: int = 800, eps: float = 1e-4,
                   half_width: float | None = None):
    g = GridSpec.around(a, nx=nx, nt=nt, eps=eps, half_width=half_width)
    return solve(ModelParams(a, pi), g)


@pytest.fixture(scope="session")
def surface():
    return cached_surface
