"""Compiled and pure-Python kernels must agree; the fallback must be selectable."""
import os
import subprocess
import sys

import numpy as np
import pytest

from optratchet import _purepy

compiled = pytest.importorskip("optratchet._kernels", reason="Cython extension not built")


@pytest.mark.parametrize("x", [0.0, 1e-40, 1e-9, 0.37, 5.4795, 49.0, 1234.5])
@pytest.mark.parametrize("nmax", [0, 1, 17, 90])
def test_bessel_table_parity(nmax, x):
    a = compiled.bessel_table(nmax, x)
    b = _purepy.bessel_table(nmax, x)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)


def test_miller_start_parity():
    for nmax, x in [(0, 0.1), (40, 5.5), (3, 1e4), (100, 99.5)]:
        assert compiled.miller_start(nmax, x) == _purepy.miller_start(nmax, x)
        assert compiled.miller_start(nmax, x) % 2 == 0


def test_rk4_parity():
    rng = np.random.default_rng(7)
    amps = rng.normal(size=(3, 21)) + 1j * rng.normal(size=(3, 21))
    det = np.arange(-10, 11) * 0.41
    a, bad_a = compiled.rk4_evolve(amps, det, 1.3, 1e-3, 500)
    b, bad_b = _purepy.rk4_evolve(amps, det, 1.3, 1e-3, 500)
    assert bad_a == bad_b == -1
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)
    # input untouched
    assert np.all(np.isfinite(amps))


@pytest.mark.parametrize("impl", [compiled, _purepy], ids=["cython", "python"])
def test_rk4_single_site(impl):
    # one isolated site: a(z) = exp(-i d z) up to the RK4 truncation error
    out, bad = impl.rk4_evolve(np.array([[1.0 + 0j]]), np.array([2.0]), 1.0, 1e-3, 1000)
    assert bad == -1
    assert out[0, 0] == pytest.approx(np.exp(-2j), abs=1e-11)


@pytest.mark.parametrize("impl", [compiled, _purepy], ids=["cython", "python"])
def test_rk4_reports_blowup(impl):
    det = np.arange(-5, 6) * 1000.0
    out, bad = impl.rk4_evolve(np.ones((1, 11), complex), det, 1.0, 0.1, 3000)
    assert bad >= 0


def test_pure_python_fallback_selected_by_env():
    env = dict(os.environ, OPTRATCHET_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import optratchet; print(optratchet.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_default_backend_is_compiled():
    import optratchet

    if os.environ.get("OPTRATCHET_PURE_PYTHON"):
        pytest.skip("fallback forced")
    assert optratchet.BACKEND == "cython"
