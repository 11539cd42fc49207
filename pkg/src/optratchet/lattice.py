"""Waveguide-array model, linear propagation-constant ramp and ratchet input.

Sites are labelled by their physical index ``j = -M..M`` with ``j = 0`` the
middle waveguide. Arrays store site ``j`` at offset ``j + M``; that offset never
leaks through the public functions, which all take physical indices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Extra sites kept beyond the largest Bessel order that carries intensity.
TRUNCATION_MARGIN = 10
#: Smallest half-width used by default, whatever the ramp.
MIN_DEFAULT_HALF_WIDTH = 40


def _check_finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


def required_half_width(coupling, ramp, z_max=None):
    """Smallest half-width for which the truncated array behaves as infinite.

    With a ramp the Bessel argument never exceeds ``4C/beta``, so intensity is
    confined to orders below that. Without a ramp the packet spreads ballistically
    as ``J_j(2Cz)`` and the requirement depends on the propagation length; it is
    infinite when ``z_max`` is not given.
    """
    if ramp > 0:
        return math.ceil(4.0 * coupling / ramp) + TRUNCATION_MARGIN
    if z_max is None:
        return math.inf
    return math.ceil(2.0 * coupling * z_max) + TRUNCATION_MARGIN


def default_half_width(coupling, ramp, z_max=None):
    """Default half-width ``max(40, required_half_width)``."""
    need = required_half_width(coupling, ramp, z_max)
    if math.isinf(need):
        raise ValueError("a flat array (ramp = 0) needs z_max to size the truncation")
    return max(MIN_DEFAULT_HALF_WIDTH, need)


@dataclass(frozen=True)
class LatticeModel:
    """Finite section ``-M..M`` of an evanescently coupled waveguide array.

    Parameters
    ----------
    half_width : int
        ``M``; the array holds ``2M + 1`` waveguides.
    coupling : float
        Nearest-neighbour coupling ``C > 0`` (inverse length).
    ramp : float
        Propagation-constant gradient ``beta >= 0``; waveguide ``j`` has
        propagation constant ``j * beta``.
    """

    half_width: int
    coupling: float
    ramp: float
    truncation_adequate: bool = field(init=False, compare=False)

    def __post_init__(self):
        if isinstance(self.half_width, bool) or int(self.half_width) != self.half_width:
            raise ValueError(f"half_width must be an integer, got {self.half_width!r}")
        object.__setattr__(self, "half_width", int(self.half_width))
        object.__setattr__(self, "coupling", float(self.coupling))
        object.__setattr__(self, "ramp", float(self.ramp))
        _check_finite("coupling", self.coupling)
        _check_finite("ramp", self.ramp)
        if self.half_width < 1:
            raise ValueError(f"half_width must be >= 1, got {self.half_width}")
        if self.coupling <= 0:
            raise ValueError(f"coupling must be positive, got {self.coupling}")
        if self.ramp < 0:
            raise ValueError(f"ramp must be non-negative, got {self.ramp}")
        adequate = self.half_width >= required_half_width(self.coupling, self.ramp)
        object.__setattr__(self, "truncation_adequate", adequate)

    @property
    def size(self):
        return 2 * self.half_width + 1

    @property
    def sites(self):
        """Physical site indices ``-M..M`` as an integer array."""
        return np.arange(-self.half_width, self.half_width + 1)

    def offset(self, j):
        """Storage offset of physical site ``j``."""
        if abs(j) > self.half_width:
            raise IndexError(f"site {j} outside -{self.half_width}..{self.half_width}")
        return j + self.half_width

    def adequate_for(self, z_max):
        """Truncation check that also covers the flat (``ramp = 0``) array."""
        return self.half_width >= required_half_width(self.coupling, self.ramp, z_max)


def build_model(half_width, coupling, ramp):
    """Validate parameters and return a :class:`LatticeModel`.

    An array narrower than the truncation rule is still returned, with
    ``truncation_adequate`` set to False, so tests can use tiny arrays.
    """
    return LatticeModel(half_width, coupling, ramp)


@dataclass(frozen=True)
class InputSpec:
    """Two-site excitation ``a_0 = 1``, ``a_1 = alpha * exp(i phi)``.

    ``phi`` is in radians and is stored reduced to ``[0, 2 pi)``.
    """

    alpha: float
    phi: float = 0.0

    def __post_init__(self):
        alpha = float(self.alpha)
        phi = float(self.phi)
        _check_finite("alpha", alpha)
        _check_finite("phi", phi)
        if alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {alpha}")
        phi = math.fmod(phi, 2.0 * math.pi)
        if phi < 0:
            phi += 2.0 * math.pi
        if phi >= 2.0 * math.pi:
            phi = 0.0
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_degrees(cls, alpha, phi_deg):
        return cls(alpha, math.radians(phi_deg))

    @property
    def power(self):
        """Launched power ``1 + alpha**2``."""
        return 1.0 + self.alpha * self.alpha

    @property
    def secondary_amplitude(self):
        return self.alpha * complex(math.cos(self.phi), math.sin(self.phi))


class FieldState:
    """Complex site amplitudes at propagation distance ``z``.

    Parameters
    ----------
    z : float
        Propagation distance.
    amplitudes : array_like
        Complex amplitudes for sites ``-M..M``; the length must be odd.
    edge_leakage : float, optional
        Intensity measured at, or lost past, the array edges.
    method : str, optional
        Tag of the propagator that produced the state.
    """

    __slots__ = ("z", "amplitudes", "edge_leakage", "method")

    def __init__(self, z, amplitudes, edge_leakage=0.0, method="input"):
        amps = np.array(amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size % 2 == 0:
            raise ValueError(f"amplitudes must be a 1-d array of odd length, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        if not (math.isfinite(z) and z >= 0):
            raise ValueError(f"z must be finite and non-negative, got {z!r}")
        amps.setflags(write=False)
        self.z = float(z)
        self.amplitudes = amps
        self.edge_leakage = float(edge_leakage)
        self.method = method

    @property
    def half_width(self):
        return (self.amplitudes.size - 1) // 2

    @property
    def sites(self):
        m = self.half_width
        return np.arange(-m, m + 1)

    def amplitude(self, j):
        if abs(j) > self.half_width:
            raise IndexError(f"site {j} outside -{self.half_width}..{self.half_width}")
        return complex(self.amplitudes[j + self.half_width])

    def __repr__(self):
        return (f"FieldState(z={self.z!r}, half_width={self.half_width}, "
                f"method={self.method!r}, edge_leakage={self.edge_leakage:.3g})")


def propagation_constant(model, j):
    """Propagation constant ``j * beta`` of waveguide ``j``."""
    model.offset(j)
    return j * model.ramp


def propagation_constants(model):
    """Propagation constants of all sites, ordered ``-M..M``."""
    return model.sites * model.ramp


def initial_state(model, inp):
    """Launch field: unit amplitude at ``j = 0`` and ``alpha e^{i phi}`` at ``j = 1``."""
    if model.half_width < 1:
        raise ValueError("the ratchet input needs site j = 1; half_width must be >= 1")
    amps = np.zeros(model.size, dtype=np.complex128)
    amps[model.offset(0)] = 1.0
    if inp.alpha != 0.0:
        amps[model.offset(1)] = inp.secondary_amplitude
    return FieldState(0.0, amps)


def total_power(state):
    """Sum of site intensities."""
    a = state.amplitudes
    return float(np.sum(a.real * a.real + a.imag * a.imag))
