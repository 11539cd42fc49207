"""Intensities, site moments and their closed forms.

Moments follow the unnormalised convention ``<j> = sum_j j I_j``, whose total
weight is the launched power ``1 + alpha^2``; pass ``normalized=True`` to divide
by the power instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_row
from .lattice import InputSpec, LatticeModel
from .propagators import PropagationMethod, bloch_argument, green_columns, propagate_series


def intensity_profile(state):
    """``I_j = |a_j|^2`` for ``j = -M..M``."""
    a = state.amplitudes
    return a.real * a.real + a.imag * a.imag


def _moment(state, power, normalized):
    intensity = intensity_profile(state)
    value = float(np.sum(state.sites.astype(float) ** power * intensity))
    if normalized:
        value /= float(np.sum(intensity))
    return value


def mean_site(state, normalized=False):
    """First site moment ``sum_j j I_j``."""
    return _moment(state, 1, normalized)


def mean_site_sq(state, normalized=False):
    """Second site moment ``sum_j j^2 I_j``."""
    return _moment(state, 2, normalized)


def _cross_phase(model, inp, z, cross_sign=-1):
    return 0.5 * model.ramp * z + cross_sign * inp.phi


def intensity_closed_form(model, inp, j, z, cross_sign=-1):
    """Closed-form output intensity of site ``j``.

    ``J_{-j}(X)^2 + alpha^2 J_{1-j}(X)^2 - 2 alpha J_{-j}(X) J_{1-j}(X) sin(beta z/2 - phi)``
    with ``X`` the Bloch argument. ``cross_sign=+1`` swaps the interference
    phase to ``beta z/2 + phi``; it exists for the convention audit.
    """
    model.offset(j)
    if not z >= 0:
        raise ValueError(f"z must be >= 0, got {z}")
    x = bloch_argument(model, z)
    row = bessel_row(-j, 1 - j, x)
    j0, j1 = row[-j], row[1 - j]
    a = inp.alpha
    return j0 * j0 + a * a * j1 * j1 - 2.0 * a * j0 * j1 * math.sin(_cross_phase(model, inp, z, cross_sign))


def _ratchet_term(model, inp, z):
    """``(4 alpha C/beta) sin(beta z/2) sin(beta z/2 - phi)``, regular at ``beta = 0``."""
    x = np.asarray(bloch_argument(model, z))
    return inp.alpha * x * np.sin(0.5 * model.ramp * np.asarray(z, dtype=float) - inp.phi)


def _scalar(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def mean_site_closed_form(model, inp, z):
    """``alpha^2 + (4 alpha C/beta) sin(beta z/2) sin(beta z/2 - phi)``.

    Accepts scalar or array ``z``. For ``beta z -> 0`` the Bloch argument is
    evaluated from its series, giving ``alpha^2 - 2 alpha C z sin(phi)`` at
    leading order.
    """
    return _scalar(inp.alpha ** 2 + _ratchet_term(model, inp, z))


def mean_site_sq_closed_form(model, inp, z):
    """Second moment: first moment plus ``((1 + alpha^2)/2) X^2``."""
    x = np.asarray(bloch_argument(model, z))
    return _scalar(inp.alpha ** 2 + _ratchet_term(model, inp, z) + 0.5 * inp.power * x * x)


def small_z_slope(model, inp):
    """``d<j>/dz`` at ``z = 0``: ``-2 alpha C sin(phi)``.

    Negative slopes move the centroid toward lower site index.
    """
    return -2.0 * inp.alpha * model.coupling * math.sin(inp.phi)


class NoBlochPeriod(ValueError):
    """A flat array (``beta = 0``) has no Bloch period."""


def bloch_period(model):
    """Revival distance ``2 pi / beta``."""
    if model.ramp == 0:
        raise NoBlochPeriod("ramp is zero: dynamics are aperiodic discrete diffraction")
    return 2.0 * math.pi / model.ramp


def audit_intensity_convention(model, inp, z_points, tol=1e-10):
    """Compare the two interference-phase conventions against the Green's function.

    For each ``cross_sign`` in ``(-1, +1)`` the closed-form intensity with
    ``sin(beta z/2 + cross_sign * phi)`` is compared to
    ``|G_{j,0} + alpha e^{i phi} G_{j,1}|^2`` over all sites and ``z_points``.

    Returns
    -------
    dict
        ``{"errors": {-1: max_err, +1: max_err}, "matches": [signs within tol]}``.
    """
    sites = model.sites
    errors = {-1: 0.0, 1: 0.0}
    for z in z_points:
        g0, g1 = green_columns(model, z)
        exact = np.abs(g0 + inp.secondary_amplitude * g1) ** 2
        x = bloch_argument(model, z)
        row = bessel_row(-model.half_width, model.half_width + 1, x)
        j0 = row.take(-sites)
        j1 = row.take(1 - sites)
        a = inp.alpha
        for s in errors:
            closed = j0 ** 2 + a * a * j1 ** 2 - 2.0 * a * j0 * j1 * math.sin(_cross_phase(model, inp, z, s))
            errors[s] = max(errors[s], float(np.max(np.abs(closed - exact))))
    return {"errors": errors, "matches": [s for s, e in errors.items() if e <= tol]}


@dataclass(eq=False)
class ObservableSeries:
    """Per-``z`` intensities and moments of one propagation run."""

    z_grid: np.ndarray
    intensity: np.ndarray
    power: np.ndarray
    mean_site: np.ndarray
    mean_site_sq: np.ndarray
    edge_leakage: np.ndarray
    model: LatticeModel
    inp: InputSpec
    method: str
    normalized: bool = False
    sites: np.ndarray = field(init=False)

    def __post_init__(self):
        self.sites = self.model.sites

    @property
    def max_leakage(self):
        return float(np.max(self.edge_leakage)) if self.edge_leakage.size else 0.0


def observable_series(model, inp, z_grid, method=PropagationMethod(), normalized=False):
    """Propagate over ``z_grid`` and collect intensities and moments."""
    if isinstance(method, str):
        method = PropagationMethod(method)
    states = propagate_series(model, inp, z_grid, method)
    intensity = np.array([intensity_profile(s) for s in states])
    power = intensity.sum(axis=1)
    j = model.sites.astype(float)
    m1 = intensity @ j
    m2 = intensity @ (j * j)
    if normalized:
        m1 = m1 / power
        m2 = m2 / power
    return ObservableSeries(
        z_grid=np.asarray(z_grid, dtype=float),
        intensity=intensity,
        power=power,
        mean_site=m1,
        mean_site_sq=m2,
        edge_leakage=np.array([s.edge_leakage for s in states]),
        model=model,
        inp=inp,
        method=method.tag,
        normalized=normalized,
    )
