import math

import pytest

import oracles


@pytest.fixture(scope="session")
def unit_loop_oracle():
    """Extrapolated shortest loop length enclosing unit area, with the raw n-gon optima."""
    return oracles.richardson_loop_length(1.0)


@pytest.fixture(scope="session")
def sqrt_pi():
    return math.sqrt(math.pi)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
