"""Cross-checks between the propagators, the closed forms and the Bessel kernel.

Each ``check_*`` function returns one or more :class:`Check` records holding the
measured worst-case deviation next to its tolerance. ``run_all`` drives the
whole suite for the ``verify`` command.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .bessel import bessel_j, bessel_row
from .lattice import InputSpec, build_model, default_half_width, initial_state, total_power
from .observables import (
    audit_intensity_convention,
    bloch_period,
    intensity_profile,
    mean_site,
    mean_site_closed_form,
    mean_site_sq,
    mean_site_sq_closed_form,
    small_z_slope,
)
from .propagators import (
    GREEN_SIGN,
    green_columns,
    propagate_green,
    propagate_spectral,
    rk4_trajectories,
    spectral_residual,
)

ALPHAS = (0.0, 0.5, 1.0)
PHIS_DEG = (0.0, 37.0, 90.0, 217.0)
RATIOS = (0.3, 0.73, 2.0)
N_Z = 20

TOL = {
    "oracle_intensity": 1e-6,
    "oracle_amplitude": 1e-6,
    "power_exact": 1e-9,
    "power_rk4": 1e-8,
    "leakage": 1e-10,
    "moments": 1e-8,
    "symmetry": 1e-10,
    "bloch_mean": 1e-9,
    "revival": 1e-8,
    "slope_rel": 1e-4,
    "slope_magnitude": 1e-6,
    "phase_flip": 1e-10,
    "locking": 1e-10,
    "convention": 1e-10,
    "bessel_identity": 1e-10,
    "bessel_series": 1e-12,
    "green_sign": 1e-6,
    "spectral_residual": 1e-4,
}


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        text = f"{flag}  {self.name:<28s} measured={self.measured:.3e}  tol={self.tolerance:.1e}"
        return f"{text}  {self.detail}" if self.detail else text


def _check(name, measured, key_or_tol, detail="", below=True):
    tol = TOL[key_or_tol] if isinstance(key_or_tol, str) else key_or_tol
    ok = bool(np.isfinite(measured)) and (measured <= tol if below else measured >= tol)
    return Check(name, float(measured), float(tol), ok, detail)


# --------------------------------------------------------------------------
# Oracle grid
# --------------------------------------------------------------------------

@dataclass
class GridPoint:
    alpha: float
    phi_deg: float
    ratio: float
    z: float
    d_intensity: float
    d_amplitude: float
    power_err: dict
    leakage: float
    m1_err: float
    m2_err: float


@dataclass
class GridResult:
    points: List[GridPoint] = field(default_factory=list)
    seconds: float = 0.0

    def worst(self, attr):
        return max(getattr(p, attr) for p in self.points)

    def worst_power(self, method):
        return max(p.power_err[method] for p in self.points)


def _model_for(ratio, coupling, half_width):
    ramp = ratio * coupling
    m = default_half_width(coupling, ramp) if half_width is None else half_width
    return build_model(m, coupling, ramp)


def oracle_grid(alphas=ALPHAS, phis_deg=PHIS_DEG, ratios=RATIOS, n_z=N_Z,
                coupling=1.0, half_width=None, rk4_step=None, spectral_k=None):
    """Propagate every grid input with all three methods and compare.

    ``n_z`` points span ``[0, 4 pi / beta]`` for each ratio. Moments from each
    method are compared with the closed forms.
    """
    t0 = time.perf_counter()
    result = GridResult()
    for ratio in ratios:
        model = _model_for(ratio, coupling, half_width)
        zs = np.linspace(0.0, 4.0 * math.pi / model.ramp, n_z)
        inputs = [InputSpec.from_degrees(a, p) for a in alphas for p in phis_deg]
        rk4 = rk4_trajectories(model, [initial_state(model, i) for i in inputs], zs, rk4_step)
        for inp, rk4_states in zip(inputs, rk4):
            for z, r in zip(zs, rk4_states):
                g = propagate_green(model, inp, z)
                s = propagate_spectral(model, inp, z, spectral_k)
                states = {"green": g, "rk4": r, "spectral": s}
                ints = {k: intensity_profile(v) for k, v in states.items()}
                d_int = max(np.max(np.abs(ints["green"] - ints["rk4"])),
                            np.max(np.abs(ints["green"] - ints["spectral"])),
                            np.max(np.abs(ints["rk4"] - ints["spectral"])))
                d_amp = max(np.max(np.abs(g.amplitudes - r.amplitudes)),
                            np.max(np.abs(g.amplitudes - s.amplitudes)))
                power_err = {k: abs(total_power(v) - inp.power) for k, v in states.items()}
                m1 = mean_site_closed_form(model, inp, z)
                m2 = mean_site_sq_closed_form(model, inp, z)
                m1_err = max(abs(mean_site(v) - m1) for v in states.values())
                m2_err = max(abs(mean_site_sq(v) - m2) for v in states.values())
                leak = max(v.edge_leakage for v in states.values())
                result.points.append(GridPoint(inp.alpha, math.degrees(inp.phi), ratio, float(z),
                                               float(d_int), float(d_amp), power_err, leak,
                                               m1_err, m2_err))
    result.seconds = time.perf_counter() - t0
    return result


def grid_checks(grid):
    n = len(grid.points)
    checks = [
        _check("oracle_equivalence", grid.worst("d_intensity"), "oracle_intensity",
               f"{n} points, {grid.seconds:.1f} s"),
        _check("oracle_amplitudes", grid.worst("d_amplitude"), "oracle_amplitude"),
        _check("power_green", grid.worst_power("green"), "power_exact"),
        _check("power_spectral", grid.worst_power("spectral"), "power_exact"),
        _check("power_rk4", grid.worst_power("rk4"), "power_rk4"),
        _check("truncation_leakage", grid.worst("leakage"), "leakage"),
    ]
    clean = [p for p in grid.points if p.leakage < TOL["leakage"]]
    if clean:
        worst = max(max(p.m1_err, p.m2_err) for p in clean)
        checks.append(_check("closed_form_moments", worst, "moments",
                             f"{len(clean)}/{n} points below leakage tolerance"))
    else:
        checks.append(Check("closed_form_moments", math.inf, TOL["moments"], False,
                            "no grid point has acceptable truncation leakage"))
    return checks


# --------------------------------------------------------------------------
# Single-configuration checks
# --------------------------------------------------------------------------

def check_bloch_limit(model, n_z=N_Z, rk4_step=None):
    """``alpha = 0``: mirror-symmetric profiles, zero centroid, revival after one period."""
    inp = InputSpec(0.0, math.radians(37.0))
    period = bloch_period(model)
    zs = np.linspace(0.0, 2.0 * period, n_z)
    sym = 0.0
    centroid = 0.0
    for z in zs:
        for st in (propagate_green(model, inp, z), propagate_spectral(model, inp, z)):
            ints = intensity_profile(st)
            sym = max(sym, float(np.max(np.abs(ints - ints[::-1]))))
            centroid = max(centroid, abs(mean_site(st)))
    rk4 = rk4_trajectories(model, [initial_state(model, inp)], zs, rk4_step)[0]
    for st in rk4:
        ints = intensity_profile(st)
        sym = max(sym, float(np.max(np.abs(ints - ints[::-1]))))
        centroid = max(centroid, abs(mean_site(st)))
    revived = [propagate_green(model, inp, period), propagate_spectral(model, inp, period),
               rk4_trajectories(model, [initial_state(model, inp)], [period], rk4_step)[0][0]]
    revival = max(abs(abs(st.amplitude(0)) ** 2 - 1.0) for st in revived)
    return [
        _check("bloch_symmetry", sym, "symmetry"),
        _check("bloch_zero_centroid", centroid, "bloch_mean"),
        _check("bloch_revival", revival, "revival", f"z = 2pi/beta = {period:.6g}"),
    ]


def fd_slope(model, inp, z0=2e-6, dz=1e-6):
    """Central difference of the direct-sum centroid near ``z = 0``."""
    up = mean_site(propagate_green(model, inp, z0 + dz))
    down = mean_site(propagate_green(model, inp, z0 - dz))
    return (up - down) / (2.0 * dz)


def check_ratchet_direction(model, alpha=1.0):
    left = InputSpec.from_degrees(alpha, 37.0)
    right = InputSpec.from_degrees(alpha, 217.0)
    s_left = fd_slope(model, left)
    s_right = fd_slope(model, right)
    rel = max(abs(s_left / small_z_slope(model, left) - 1.0),
              abs(s_right / small_z_slope(model, right) - 1.0))
    direction_ok = s_left < 0 < s_right
    return [
        Check("ratchet_direction", float(s_left), 0.0, direction_ok,
              f"slope(37deg)={s_left:.6f} slope(217deg)={s_right:.6f}"),
        _check("ratchet_slope_magnitude", abs(abs(s_left) - abs(s_right)), "slope_magnitude"),
        _check("ratchet_slope_formula", rel, "slope_rel", "vs -2 alpha C sin(phi)"),
    ]


def check_phase_flip_and_locking(model, alphas=(0.5, 1.0), phis_deg=PHIS_DEG, n_z=N_Z):
    zs = np.linspace(0.0, 4.0 * math.pi / model.ramp, n_z)
    flip = 0.0
    lock = 0.0
    for a in alphas:
        for z in zs:
            diffs = []
            for p in phis_deg:
                inp = InputSpec.from_degrees(a, p)
                st = propagate_green(model, inp, z)
                st_flip = propagate_green(model, InputSpec.from_degrees(a, p + 180.0), z)
                flip = max(flip, abs((mean_site(st) - a * a) + (mean_site(st_flip) - a * a)))
                diffs.append(mean_site_sq(st) - mean_site(st))
            lock = max(lock, max(diffs) - min(diffs))
    return [
        _check("phase_flip_antisymmetry", flip, "phase_flip"),
        _check("energy_momentum_locking", lock, "locking"),
    ]


def check_convention(model, alphas=(0.5, 1.0), phis_deg=PHIS_DEG, n_z=N_Z):
    zs = np.linspace(0.0, 4.0 * math.pi / model.ramp, n_z)
    errors = {-1: 0.0, 1: 0.0}
    for a in alphas:
        for p in phis_deg:
            audit = audit_intensity_convention(model, InputSpec.from_degrees(a, p), zs, TOL["convention"])
            for s in errors:
                errors[s] = max(errors[s], audit["errors"][s])
    matches = [s for s, e in errors.items() if e <= TOL["convention"]]
    label = {-1: "sin(beta z/2 - phi)", 1: "sin(beta z/2 + phi)"}
    detail = (f"matching convention: {', '.join(label[s] for s in matches) or 'none'}; "
              f"err(-phi)={errors[-1]:.2e} err(+phi)={errors[1]:.2e}")
    return [Check("intensity_convention", min(errors.values()), TOL["convention"],
                  len(matches) == 1, detail)]


def literal_green_discrepancy(model, inp, z):
    """Largest intensity error if the source-independent ``exp(i beta z)`` prefactor is used.

    With a constant prefactor the two input columns lose their relative
    ``exp(-i beta z)`` phase; reported for information only.
    """
    g0, g1 = green_columns(model, z)
    exact = np.abs(g0 + inp.secondary_amplitude * g1) ** 2
    lit0 = g0 * np.exp(1j * GREEN_SIGN * model.ramp * z)
    literal = np.abs(lit0 + inp.secondary_amplitude * g1) ** 2
    return float(np.max(np.abs(literal - exact)))


def resolve_green_sign(model, probe_z=1.3, dz=1e-5, sources=(0, 1)):
    """Finite-difference residual of the coupled-mode equations for each exponent sign.

    Returns ``{sign: residual}``; the correct sign has an ``O(dz^2)`` residual.
    """
    out = {}
    for sign in (1, -1):
        res = 0.0
        for s in sources:
            up = green_columns(model, probe_z + dz, (s,), sign)[0]
            down = green_columns(model, probe_z - dz, (s,), sign)[0]
            mid = green_columns(model, probe_z, (s,), sign)[0]
            deriv = (up - down) / (2.0 * dz)
            rhs = -1j * model.sites * model.ramp * mid
            rhs[1:] += -1j * model.coupling * mid[:-1]
            rhs[:-1] += -1j * model.coupling * mid[1:]
            res = max(res, float(np.max(np.abs(deriv - rhs))))
        out[sign] = res
    return out


def check_green_sign(model):
    res = resolve_green_sign(model)
    best = min(res, key=res.get)
    return [Check("green_sign", res[GREEN_SIGN], TOL["green_sign"],
                  best == GREEN_SIGN and res[GREEN_SIGN] <= TOL["green_sign"],
                  f"adopted s={GREEN_SIGN:+d}; residual(+1)={res[1]:.2e} residual(-1)={res[-1]:.2e}")]


def check_spectral_residual(model, inp, z=None, dz=1e-3, K=129):
    z = 0.37 * bloch_period(model) if z is None else z
    K = max(K, model.size + (model.size % 2 == 0))
    r1 = spectral_residual(model, inp, z, dz, K)
    r2 = spectral_residual(model, inp, z, dz / 2, K)
    return [
        _check("spectral_residual", r1, "spectral_residual", f"dz={dz:g}, K={K}"),
        Check("spectral_residual_order", r1 / r2 if r2 > 0 else math.inf, 3.0,
              r2 == 0 or r1 / r2 >= 3.0, "ratio for dz halved (expect ~4)"),
    ]


# --------------------------------------------------------------------------
# Bessel
# --------------------------------------------------------------------------

BESSEL_XS = (0.5, 2.0, 5.4795, 10.0)


def bessel_series(n, x, terms=None):
    """Power series ``sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)`` in double precision.

    For ``|x| <= 10`` the largest term is below ``1e3``, so summation error stays
    near ``1e-13``. Negative orders use the reflection identity.
    """
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    half = x / 2.0
    term = half ** n / math.factorial(n)
    total = term
    k = 0
    while True:
        k += 1
        term *= -(half * half) / (k * (k + n))
        total += term
        if abs(term) < 1e-18 * max(1.0, abs(total)) and k > half:
            break
        if terms is not None and k >= terms:
            break
    return sign * total


def check_bessel(xs=BESSEL_XS, max_order=20):
    refl = 0.0
    norm = 0.0
    squares = 0.0
    series = 0.0
    for x in xs:
        width = int(abs(x)) + 60
        row = bessel_row(-width, width, x)
        n = np.arange(1, width + 1)
        refl = max(refl, float(np.max(np.abs(row.take(-n) - (1.0 - 2.0 * (n & 1)) * row.take(n)))))
        even = row.take(np.arange(2, width + 1, 2))
        norm = max(norm, abs(row[0] + 2.0 * even.sum() - 1.0))
        squares = max(squares, abs(float(np.sum(row.values ** 2)) - 1.0))
        for order in range(-max_order, max_order + 1):
            series = max(series, abs(bessel_j(order, x) - bessel_series(order, x)))
    return [
        _check("bessel_reflection", refl, "bessel_identity"),
        _check("bessel_normalization", norm, "bessel_identity"),
        _check("bessel_sum_of_squares", squares, "bessel_identity"),
        _check("bessel_series_oracle", series, "bessel_series", f"|x|<=10, |n|<={max_order}"),
    ]


# --------------------------------------------------------------------------
# Driver
# --------------------------------------------------------------------------

def run_all(coupling=1.0, beta_over_c=0.73, half_width=None, rk4_step=None,
            spectral_k=None, grid: Optional[GridResult] = None):
    """Run the full suite; returns a list of :class:`Check`."""
    if grid is None:
        grid = oracle_grid(coupling=coupling, half_width=half_width, rk4_step=rk4_step,
                           spectral_k=spectral_k)
    model = _model_for(beta_over_c, coupling, half_width)
    checks = grid_checks(grid)
    checks += check_bloch_limit(model, rk4_step=rk4_step)
    checks += check_ratchet_direction(model)
    checks += check_phase_flip_and_locking(model)
    checks += check_convention(model)
    checks += check_green_sign(model)
    checks += check_spectral_residual(model, InputSpec.from_degrees(1.0, 37.0))
    checks += check_bessel()
    return checks
