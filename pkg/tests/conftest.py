import math

import mpmath
import pytest

from optratchet import InputSpec, build_model

RATIO = 0.73


def series_bessel(n, x, dps=50):
    """``J_n(x)`` from its Taylor series in extended precision.

    Returns ``(value, remainder_bound)``. Past ``k > x/2`` the series alternates
    with decreasing terms, so the first omitted term bounds the remainder.
    """
    sign = 1
    if n < 0:
        n = -n
        sign = -1 if n % 2 else 1
    with mpmath.workdps(dps):
        h = mpmath.mpf(x) / 2
        total = mpmath.mpf(0)
        k = 0
        while True:
            term = h ** (2 * k + n) / (mpmath.factorial(k) * mpmath.factorial(k + n))
            if k > abs(h) and abs(term) < mpmath.mpf(10) ** (-dps + 10):
                return sign * float(total), float(term)
            total += -term if k % 2 else term
            k += 1


@pytest.fixture
def model():
    """Reference parameters: C = 1, beta/C = 0.73, default truncation."""
    return build_model(40, 1.0, RATIO)


@pytest.fixture
def ratchet():
    return InputSpec.from_degrees(1.0, 37.0)


@pytest.fixture
def half_period(model):
    return math.pi / model.ramp


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
