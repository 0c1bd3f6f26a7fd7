import numpy as np
import pytest

from geoellipsoid.manifold import hyperbolic, spherical

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["hyperbolic", "spherical"])
def spec2(request):
    return hyperbolic(2) if request.param == "hyperbolic" else spherical(2)


@pytest.fixture
def record_criterion():
    """Collect one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number, passed, detail):
        ACCEPTANCE_LINES.append((number, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
