"""Light propagation in a linearly ramped waveguide array and the optical quantum ratchet."""
from ._backend import BACKEND
from .bessel import BesselRow, bessel_j, bessel_row
from .lattice import (
    FieldState,
    InputSpec,
    LatticeModel,
    build_model,
    default_half_width,
    initial_state,
    propagation_constant,
    total_power,
)
from .observables import (
    ObservableSeries,
    bloch_period,
    intensity_closed_form,
    intensity_profile,
    mean_site,
    mean_site_closed_form,
    mean_site_sq,
    mean_site_sq_closed_form,
    observable_series,
    small_z_slope,
)
from .propagators import (
    GREEN_SIGN,
    PropagationMethod,
    SpectralField,
    forward_transform,
    green_coefficient,
    inverse_transform,
    propagate_green,
    propagate_rk4,
    propagate_spectral,
    spectral_residual,
)

__version__ = "0.1.0"
