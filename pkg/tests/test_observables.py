import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optratchet import (
    InputSpec,
    bloch_period,
    build_model,
    initial_state,
    intensity_closed_form,
    intensity_profile,
    mean_site,
    mean_site_closed_form,
    mean_site_sq,
    mean_site_sq_closed_form,
    observable_series,
    propagate_green,
    propagate_rk4,
    small_z_slope,
)
from optratchet.observables import NoBlochPeriod, audit_intensity_convention
from optratchet.propagators import SMALL_RAMP_PHASE, bloch_argument

from test_bessel import SERIES_ROW_X_REF

X_REF = 4.0 / 0.73


def test_input_intensities(model, ratchet):
    ints = intensity_profile(initial_state(model, ratchet))
    assert ints[40] == 1.0 and ints[41] == pytest.approx(1.0, abs=1e-15)
    assert np.count_nonzero(ints) == 2
    assert intensity_profile(initial_state(model, InputSpec(0.5, 1.0)))[41] == pytest.approx(0.25, abs=1e-16)


def test_bloch_intensity_half_period(model, half_period):
    ints = intensity_profile(propagate_green(model, InputSpec(0.0), half_period))
    np.testing.assert_allclose(ints[40:53], np.square(SERIES_ROW_X_REF), atol=1e-13)


def test_closed_form_intensity_alpha_zero(model):
    z = 3.7
    x = bloch_argument(model, z)
    from optratchet import bessel_j

    for j in (-4, 0, 2):
        assert intensity_closed_form(model, InputSpec(0.0, 1.0), j, z) == pytest.approx(bessel_j(-j, x) ** 2, abs=1e-15)


def test_closed_form_intensity_at_zero(model, ratchet):
    vals = [intensity_closed_form(model, InputSpec(0.7, 2.0), j, 0.0) for j in (-1, 0, 1, 2)]
    assert vals == pytest.approx([0.0, 1.0, 0.49, 0.0], abs=1e-15)


def test_closed_form_intensity_matches_green(model, ratchet, half_period):
    ints = intensity_profile(propagate_green(model, ratchet, half_period))
    assert intensity_closed_form(model, ratchet, -2, half_period) == pytest.approx(ints[38], abs=1e-10)
    for j in range(-15, 16):
        assert intensity_closed_form(model, ratchet, j, half_period) == pytest.approx(ints[40 + j], abs=1e-10)


def test_convention_audit_picks_minus_phi(model):
    audit = audit_intensity_convention(model, InputSpec.from_degrees(1.0, 37.0), np.linspace(0, 17, 11))
    assert audit["matches"] == [-1]
    assert audit["errors"][1] > 1e-2


def test_moments_of_inputs(model, ratchet):
    assert mean_site(initial_state(model, ratchet)) == pytest.approx(1.0, abs=1e-15)
    assert mean_site_sq(initial_state(model, ratchet)) == pytest.approx(1.0, abs=1e-15)
    assert mean_site(initial_state(model, InputSpec(0.0))) == 0.0
    assert mean_site_sq(initial_state(model, InputSpec(0.0))) == 0.0
    assert mean_site(initial_state(model, ratchet), normalized=True) == pytest.approx(0.5)


@pytest.mark.parametrize("z", [0.5, 2.0, 4.3, 7.9, 12.0])
def test_bloch_moments(model, z):
    st0 = propagate_green(model, InputSpec(0.0, 2.0), z)
    assert abs(mean_site(st0)) < 1e-9
    assert mean_site_sq(st0) == pytest.approx(0.5 * (4 / 0.73) ** 2 * math.sin(0.73 * z / 2) ** 2, abs=1e-8)


def test_mean_closed_form_values(model, ratchet, half_period):
    assert mean_site_closed_form(model, ratchet, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert mean_site_closed_form(model, InputSpec(0.0, 1.0), 3.3) == 0.0
    expected = 1.0 + X_REF * math.sin(math.radians(53.0))
    assert expected == pytest.approx(5.376, abs=1e-3)
    assert mean_site_closed_form(model, ratchet, half_period) == pytest.approx(expected, abs=1e-12)
    rk4 = propagate_rk4(model, initial_state(model, ratchet), half_period)
    assert mean_site(rk4) == pytest.approx(expected, abs=1e-8)


def test_sq_closed_form_values(model, ratchet, half_period):
    assert mean_site_sq_closed_form(model, ratchet, 0.0) == pytest.approx(1.0, abs=1e-15)
    bloch = InputSpec(0.0)
    val = mean_site_sq_closed_form(model, bloch, half_period)
    assert val == pytest.approx(0.5 * X_REF ** 2, abs=1e-12)
    assert val == pytest.approx(15.01, abs=1e-2)
    rk4 = propagate_rk4(model, initial_state(model, bloch), half_period)
    assert mean_site_sq(rk4) == pytest.approx(val, abs=1e-8)


@pytest.mark.parametrize("z", [0.3, 1.7, 6.0, 11.1])
def test_second_terms_are_shared(model, ratchet, z):
    x = bloch_argument(model, z)
    diff = mean_site_sq_closed_form(model, ratchet, z) - mean_site_closed_form(model, ratchet, z)
    assert diff == pytest.approx(x * x, abs=1e-12)


def test_closed_forms_accept_arrays(model, ratchet):
    zs = np.linspace(0, 10, 7)
    arr = mean_site_closed_form(model, ratchet, zs)
    assert arr.shape == (7,)
    assert arr[3] == pytest.approx(mean_site_closed_form(model, ratchet, zs[3]))


def test_slope_direction(model):
    left = small_z_slope(model, InputSpec.from_degrees(1.0, 37.0))
    right = small_z_slope(model, InputSpec.from_degrees(1.0, 217.0))
    assert left < 0 < right
    assert left == pytest.approx(-right, abs=1e-15)
    assert small_z_slope(model, InputSpec(1.0, 0.0)) == 0.0


@pytest.mark.parametrize("phi_deg", [37.0, 90.0, 217.0, 300.0])
def test_slope_matches_finite_difference(model, phi_deg):
    inp = InputSpec.from_degrees(1.0, phi_deg)
    z0, dz = 1e-4, 1e-6
    fd = (mean_site(propagate_green(model, inp, z0 + dz))
          - mean_site(propagate_green(model, inp, z0 - dz))) / (2 * dz)
    # exact derivative at z0 is 2 alpha C sin(beta z0 - phi)
    assert fd == pytest.approx(2 * math.sin(0.73 * z0 - inp.phi), rel=1e-6)
    assert fd == pytest.approx(small_z_slope(model, inp), rel=1e-4)


def test_bloch_period(model):
    assert bloch_period(model) == pytest.approx(2 * math.pi / 0.73)
    assert bloch_period(model) == pytest.approx(8.6071, abs=1e-4)
    with pytest.raises(NoBlochPeriod):
        bloch_period(build_model(10, 1.0, 0.0))


@pytest.mark.parametrize("z", [0.4, 3.0, 5.5])
def test_moments_periodic(model, ratchet, z):
    T = bloch_period(model)
    assert mean_site_closed_form(model, ratchet, z + T) == pytest.approx(mean_site_closed_form(model, ratchet, z), abs=1e-9)
    direct = [mean_site(propagate_green(model, ratchet, zz)) for zz in (z, z + T)]
    assert direct[0] == pytest.approx(direct[1], abs=1e-9)


def test_flat_limit_closed_form():
    m = build_model(40, 1.0, 0.0)
    inp = InputSpec(1.0, 0.9)
    z = 2.5
    assert mean_site_closed_form(m, inp, z) == pytest.approx(1.0 - 2 * z * math.sin(0.9), abs=1e-14)
    assert mean_site_closed_form(m, inp, z) == pytest.approx(mean_site(propagate_green(m, inp, z)), abs=1e-10)
    assert mean_site_sq_closed_form(m, inp, z) == pytest.approx(mean_site_sq(propagate_green(m, inp, z)), abs=1e-10)


def test_small_ramp_continuity():
    # beta z crossing the series threshold from either side
    z = 1.0
    inp = InputSpec(1.0, 0.9)
    lo = build_model(10, 1.0, SMALL_RAMP_PHASE * (1 - 1e-9))
    hi = build_model(10, 1.0, SMALL_RAMP_PHASE * (1 + 1e-9))
    for f in (mean_site_closed_form, mean_site_sq_closed_form):
        assert abs(f(lo, inp, z) - f(hi, inp, z)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0, 2), phi=st.floats(0, 2 * math.pi), z=st.floats(0, 30))
def test_phase_flip_negates_transport(alpha, phi, z):
    m = build_model(40, 1.0, 0.73)
    a = mean_site_closed_form(m, InputSpec(alpha, phi), z) - alpha ** 2
    b = mean_site_closed_form(m, InputSpec(alpha, phi + math.pi), z) - alpha ** 2
    assert a == pytest.approx(-b, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0, 2), phi1=st.floats(0, 6.3), phi2=st.floats(0, 6.3), z=st.floats(0, 17))
def test_energy_momentum_locking(alpha, phi1, phi2, z):
    m = build_model(40, 1.0, 0.73)
    d = [mean_site_sq(s) - mean_site(s) for s in
         (propagate_green(m, InputSpec(alpha, phi1), z), propagate_green(m, InputSpec(alpha, phi2), z))]
    assert d[0] == pytest.approx(d[1], abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(phi1=st.floats(0, 6.3), phi2=st.floats(0, 6.3), z=st.floats(0, 17))
def test_alpha_zero_ignores_phase(phi1, phi2, z):
    m = build_model(40, 1.0, 0.73)
    a = propagate_green(m, InputSpec(0.0, phi1), z)
    b = propagate_green(m, InputSpec(0.0, phi2), z)
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)


@pytest.mark.parametrize("method", ["green", "rk4", "spectral"])
def test_observable_series_invariants(model, ratchet, method):
    zs = np.linspace(0, 10, 6)
    s = observable_series(model, ratchet, zs, method)
    assert s.intensity.shape == (6, 81)
    np.testing.assert_array_equal(s.mean_site, s.intensity @ model.sites.astype(float))
    np.testing.assert_allclose(s.power, 2.0, atol=1e-8)
    np.testing.assert_allclose(s.mean_site, mean_site_closed_form(model, ratchet, zs), atol=1e-8)
    assert s.method == method
    n = observable_series(model, ratchet, zs, method, normalized=True)
    np.testing.assert_allclose(n.mean_site, s.mean_site / s.power)
