"""Three independent propagators for the ramped waveguide array.

* ``green``: closed-form Bessel Green's function of the infinite array.
* ``rk4``: fixed-step Runge-Kutta integration of the coupled-mode equations
  ``da_j/dz = -i j beta a_j - i C (a_{j+1} + a_{j-1})`` on the truncated array.
* ``spectral``: the momentum-space equation
  ``d_z a(k) = -2iC cos(k) a(k) + beta d_k a(k)`` solved along its
  characteristics, then sampled on a k-grid and transformed back to sites.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import rk4_evolve
from .bessel import bessel_row
from .lattice import FieldState, InputSpec, LatticeModel, initial_state, propagation_constants

#: Sign of the Green's-function exponent. Of the two conjugate candidates only
#: ``-1`` has a z-derivative that reproduces the coupled-mode right-hand side
#: (propagation constants enter as ``-i beta_j a_j``); ``+1`` solves the
#: complex-conjugate equations. ``tests/test_propagators.py`` re-derives this
#: choice by finite differences.
GREEN_SIGN = -1

#: Below this value of ``|beta z|`` the Bloch argument is taken from its series.
SMALL_RAMP_PHASE = 1e-6

#: Leakage above which a propagated state is flagged.
LEAKAGE_FLAG = 1e-8

#: Default RK4 step, in units of the fastest local rate.
RK4_STEP_FACTOR = 1e-3
#: Largest RK4 step accepted, in units of ``1/C``.
RK4_MAX_STEP = 0.1

_SQRT_2PI = math.sqrt(2.0 * math.pi)

METHODS = ("green", "rk4", "spectral")


class StepSizeError(ValueError):
    """RK4 step larger than ``0.1 / C``."""


class NumericalError(ArithmeticError):
    """Non-finite values appeared during integration."""


class AliasingError(ValueError):
    """k-grid too coarse for the number of sites."""


def bloch_argument(model, z):
    """Bessel argument ``(4C/beta) sin(beta z / 2)``, tending to ``2Cz`` as ``beta -> 0``."""
    bz = model.ramp * np.asarray(z, dtype=float)
    c = model.coupling
    small = np.abs(bz) < SMALL_RAMP_PHASE
    with np.errstate(divide="ignore", invalid="ignore"):
        full = np.where(small, 0.0, 4.0 * c * np.sin(0.5 * bz) / np.where(small, 1.0, model.ramp))
    series = 2.0 * c * np.asarray(z, dtype=float) * (1.0 - bz * bz / 24.0)
    out = np.where(small, series, full)
    return float(out) if out.ndim == 0 else out


def _check_z(z):
    if not (math.isfinite(z) and z >= 0):
        raise ValueError(f"propagation distance must be finite and >= 0, got {z!r}")


def _leakage(amps, expected_power=None):
    """Edge-site intensity plus any power missing from the window."""
    edge = abs(amps[0]) ** 2 + abs(amps[-1]) ** 2
    if expected_power is None:
        return float(edge)
    missing = expected_power - float(np.sum(np.abs(amps) ** 2))
    return float(edge + max(missing, 0.0))


# --------------------------------------------------------------------------
# Green's function
# --------------------------------------------------------------------------

def green_phase(model, j, j_src, z, sign=GREEN_SIGN):
    """Phase of ``G_{j,j_src}(z)``: ``sign * (j_src beta z + (j - j_src)(beta z - pi)/2)``."""
    bz = model.ramp * z
    return sign * (j_src * bz + 0.5 * (j - j_src) * (bz - math.pi))


def green_coefficient(model, j, j_src, z, sign=GREEN_SIGN):
    """Transfer amplitude from site ``j_src`` to site ``j`` after distance ``z``.

    ``G = exp(i phase) * J_{j_src - j}((4C/beta) sin(beta z/2))`` with the phase
    of :func:`green_phase`. At ``beta = 0`` this is the discrete-diffraction
    kernel ``exp(-i sign (j - j_src) pi/2) J_{j_src - j}(2Cz)``.
    """
    model.offset(j)
    model.offset(j_src)
    _check_z(z)
    x = bloch_argument(model, z)
    order = j_src - j
    value = bessel_row(order, order, x)[order]
    return complex(np.exp(1j * green_phase(model, j, j_src, z, sign))) * value


def green_columns(model, z, sources=(0, 1), sign=GREEN_SIGN):
    """Green columns ``G_{j, s}(z)`` for every site ``j``, one row per source ``s``."""
    _check_z(z)
    sites = model.sites
    sources = [int(s) for s in sources]
    for s in sources:
        model.offset(s)
    x = bloch_argument(model, z)
    lo = min(sources) - model.half_width
    hi = max(sources) + model.half_width
    row = bessel_row(lo, hi, x)
    cols = np.empty((len(sources), sites.size), dtype=np.complex128)
    for i, s in enumerate(sources):
        phase = green_phase(model, sites, s, z, sign)
        cols[i] = np.exp(1j * phase) * row.take(s - sites)
    return cols


def propagate_green(model, inp, z, sign=GREEN_SIGN):
    """Ratchet input propagated by the closed-form Green's function.

    Only the two columns fed by the input are evaluated:
    ``a_j(z) = G_{j,0} + alpha e^{i phi} G_{j,1}``.
    """
    _check_z(z)
    g0, g1 = green_columns(model, z, (0, 1), sign)
    amps = g0 + inp.secondary_amplitude * g1
    return FieldState(z, amps, _leakage(amps, inp.power), "green")


# --------------------------------------------------------------------------
# Runge-Kutta
# --------------------------------------------------------------------------

def default_rk4_step(model):
    """``min(0.001/C, 0.001/(beta M))``: a thousandth of the fastest local rate."""
    rate = max(model.coupling, model.ramp * model.half_width)
    return RK4_STEP_FACTOR / rate


def _rk4_run(model, amps, dz, steps):
    h = dz / steps
    if h > RK4_MAX_STEP / model.coupling:
        raise StepSizeError(f"RK4 step {h:.3g} exceeds {RK4_MAX_STEP}/C = {RK4_MAX_STEP / model.coupling:.3g}")
    out, bad = rk4_evolve(amps, propagation_constants(model).astype(float), model.coupling, h, steps)
    if bad >= 0:
        raise NumericalError(f"non-finite amplitude after RK4 step {bad + 1}")
    return out


def propagate_rk4(model, state0, z_target, steps=None):
    """Integrate the coupled-mode equations from ``state0.z`` to ``z_target``.

    Classical fixed-step RK4 with hard walls (sites beyond ``+-M`` held at
    zero). ``steps`` defaults to the count that keeps the step at or below
    :func:`default_rk4_step`.
    """
    _check_z(z_target)
    if state0.half_width != model.half_width:
        raise ValueError("state and model have different half-widths")
    dz = z_target - state0.z
    if dz < 0:
        raise ValueError(f"z_target {z_target} is behind the state at z = {state0.z}")
    if steps is None:
        steps = max(1, math.ceil(dz / default_rk4_step(model)))
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if dz == 0:
        return FieldState(state0.z, state0.amplitudes, _leakage(state0.amplitudes), "rk4")
    out = _rk4_run(model, state0.amplitudes[None, :], dz, steps)[0]
    return FieldState(z_target, out, _leakage(out), "rk4")


def rk4_trajectories(model, states0, z_points, step=None):
    """Integrate several initial states through increasing ``z_points``.

    All states must start at the same ``z``. Each segment between consecutive
    output points uses ``ceil(dz / step)`` equal steps. Returns a list (one per
    initial state) of lists of :class:`FieldState`.
    """
    states0 = list(states0)
    if not states0:
        return []
    z0 = states0[0].z
    if any(s.z != z0 for s in states0):
        raise ValueError("initial states must share the same z")
    z_points = [float(z) for z in z_points]
    if any(b < a for a, b in zip([z0] + z_points, z_points)):
        raise ValueError("z_points must be non-decreasing and start at or after the initial z")
    h = default_rk4_step(model) if step is None else float(step)
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if h > RK4_MAX_STEP / model.coupling:
        raise StepSizeError(f"RK4 step {h:.3g} exceeds {RK4_MAX_STEP}/C")
    cur = np.stack([s.amplitudes for s in states0])
    z_cur = z0
    out = [[] for _ in states0]
    for z in z_points:
        dz = z - z_cur
        if dz > 0:
            cur = _rk4_run(model, cur, dz, max(1, math.ceil(dz / h - 1e-9)))
            z_cur = z
        for i, row in enumerate(cur):
            out[i].append(FieldState(z, row, _leakage(row), "rk4"))
    return out


# --------------------------------------------------------------------------
# Spectral (momentum-space) representation
# --------------------------------------------------------------------------

def k_grid(K):
    """``K`` points ``-pi + 2 pi m / K`` covering ``[-pi, pi)``."""
    return -math.pi + 2.0 * math.pi * np.arange(K) / K


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Samples of the momentum-space amplitude ``a(k)`` on :func:`k_grid`."""

    k_grid: np.ndarray
    values: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        K = self.values.size
        if K % 2 == 0 or self.k_grid.shape != self.values.shape:
            raise ValueError("spectral grid must have an odd number of points matching the values")
        if not np.allclose(self.k_grid, k_grid(K), rtol=0, atol=1e-12):
            raise ValueError("k-grid is not the uniform grid on [-pi, pi)")

    @property
    def size(self):
        return self.values.size

    def power(self):
        """Discrete Parseval sum ``(2 pi / K) sum |a(k_m)|^2``."""
        return float(2.0 * math.pi / self.size * np.sum(np.abs(self.values) ** 2))


def _check_grid(K, half_width):
    if int(K) != K or K % 2 == 0:
        raise AliasingError(f"K must be an odd integer, got {K!r}")
    if K < 2 * half_width + 1:
        raise AliasingError(f"K = {K} aliases a {2 * half_width + 1}-site array")


def _to_fft_order(amps, K):
    """Place site ``j`` at FFT slot ``j mod K`` with the ``(-1)^j`` grid shift folded in."""
    m = (amps.size - 1) // 2
    sites = np.arange(-m, m + 1)
    buf = np.zeros(K, dtype=np.complex128)
    buf[sites % K] = amps * (1.0 - 2.0 * (sites & 1))
    return buf


def forward_transform(state, K):
    """``a(k) = (2 pi)^{-1/2} sum_j a_j e^{-ikj}`` sampled on the K-point grid."""
    _check_grid(K, state.half_width)
    values = np.fft.fft(_to_fft_order(state.amplitudes, K)) / _SQRT_2PI
    return SpectralField(k_grid(K), values, state.z)


def _inverse_all_sites(values):
    """All ``K`` site amplitudes ``-(K-1)/2..(K-1)/2`` from grid samples."""
    K = values.size
    mk = (K - 1) // 2
    sites = np.arange(-mk, mk + 1)
    buf = np.fft.ifft(values) * _SQRT_2PI
    return buf[sites % K] * (1.0 - 2.0 * (sites & 1))


def inverse_transform(spectral, half_width):
    """``a_j = (2 pi)^{-1/2} int a(k) e^{ikj} dk`` by the periodic rectangle rule.

    The rule is exact for trigonometric polynomials of degree below ``K/2``.
    Sites beyond ``half_width`` are dropped and their power reported as leakage.
    """
    _check_grid(spectral.size, half_width)
    full = _inverse_all_sites(spectral.values)
    mk = (spectral.size - 1) // 2
    amps = full[mk - half_width: mk + half_width + 1]
    dropped = float(np.sum(np.abs(full) ** 2) - np.sum(np.abs(amps) ** 2))
    return FieldState(spectral.z, amps, _leakage(amps) + max(dropped, 0.0), "spectral")


def _initial_spectrum_at(amps0, k):
    """Exact trigonometric polynomial ``a(k, 0)`` at arbitrary ``k``."""
    m = (amps0.size - 1) // 2
    nz = np.nonzero(amps0)[0]
    sites = nz - m
    return np.exp(-1j * np.multiply.outer(k, sites)) @ amps0[nz] / _SQRT_2PI


def spectral_solution(model, amps0, k, z):
    """Characteristics solution ``a(k, z)`` at arbitrary ``k``.

    ``a(k, z) = a(k + beta z, 0) exp(-(2iC/beta)[sin(k + beta z) - sin k])``.
    The phase is written as ``-i X cos(k + beta z/2)`` with ``X`` the Bloch
    argument, which stays regular at ``beta = 0``.
    """
    k = np.asarray(k, dtype=float)
    bz = model.ramp * z
    x = bloch_argument(model, z)
    return _initial_spectrum_at(np.asarray(amps0), k + bz) * np.exp(-1j * x * np.cos(k + 0.5 * bz))


def propagate_spectral_state(model, state0, z, K=None):
    """Propagate an arbitrary state (taken at ``z = 0``) by the spectral method."""
    _check_z(z)
    if state0.half_width != model.half_width:
        raise ValueError("state and model have different half-widths")
    K = model.size if K is None else int(K)
    _check_grid(K, model.half_width)
    grid = k_grid(K)
    spectral = SpectralField(grid, spectral_solution(model, state0.amplitudes, grid, z), z)
    out = inverse_transform(spectral, model.half_width)
    power0 = float(np.sum(np.abs(state0.amplitudes) ** 2))
    leak = max(out.edge_leakage, _leakage(out.amplitudes, power0))
    return FieldState(z, out.amplitudes, leak, "spectral")


def propagate_spectral(model, inp, z, K=None):
    """Ratchet input propagated in momentum space; ``K`` defaults to ``2M + 1``."""
    return propagate_spectral_state(model, initial_state(model, inp), z, K)


def spectral_residual(model, inp, z, dz, K=None):
    """Largest pointwise residual of the momentum-space equation on the k-grid.

    Evaluates ``|d_z a + 2iC cos(k) a - beta d_k a|`` with central differences
    in ``z`` (step ``dz``) and in ``k`` (step ``beta dz``, along the
    characteristic), so the residual is ``O(dz^2)``.
    """
    if not dz > 0:
        raise ValueError(f"dz must be positive, got {dz}")
    if not model.ramp > 0:
        raise ValueError("spectral_residual needs a positive ramp")
    K = model.size if K is None else int(K)
    _check_grid(K, model.half_width)
    amps0 = initial_state(model, inp).amplitudes
    grid = k_grid(K)
    dk = model.ramp * dz
    a = spectral_solution(model, amps0, grid, z)
    d_z = (spectral_solution(model, amps0, grid, z + dz)
           - spectral_solution(model, amps0, grid, z - dz)) / (2.0 * dz)
    d_k = (spectral_solution(model, amps0, grid + dk, z)
           - spectral_solution(model, amps0, grid - dk, z)) / (2.0 * dk)
    res = d_z + 2j * model.coupling * np.cos(grid) * a - model.ramp * d_k
    return float(np.max(np.abs(res)))


# --------------------------------------------------------------------------
# Dispatch
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PropagationMethod:
    """Propagator tag plus its controls.

    ``step`` is the RK4 step size (default :func:`default_rk4_step`), ``K``
    the spectral grid size (default ``2M + 1``).
    """

    tag: str = "green"
    step: Optional[float] = None
    K: Optional[int] = None

    def __post_init__(self):
        if self.tag not in METHODS:
            raise ValueError(f"unknown method {self.tag!r}; choose from {', '.join(METHODS)}")
        if self.step is not None and not self.step > 0:
            raise ValueError(f"RK4 step must be positive, got {self.step}")
        if self.K is not None and not self.K > 0:
            raise ValueError(f"spectral K must be positive, got {self.K}")


def propagate_series(model: LatticeModel, inp: InputSpec, z_grid, method=PropagationMethod()):
    """Propagate the ratchet input to every ``z`` in ``z_grid`` (non-decreasing)."""
    if isinstance(method, str):
        method = PropagationMethod(method)
    z_grid = [float(z) for z in z_grid]
    for z in z_grid:
        _check_z(z)
    if method.tag == "green":
        return [propagate_green(model, inp, z) for z in z_grid]
    if method.tag == "spectral":
        return [propagate_spectral(model, inp, z, method.K) for z in z_grid]
    return rk4_trajectories(model, [initial_state(model, inp)], z_grid, method.step)[0]
