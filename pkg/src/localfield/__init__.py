"""Local-field corrections to spontaneous decay in a dilute dielectric.

Modules
-------
specfun
    Spherical Bessel/Hankel functions, spherical harmonics, Wigner 3-j.
propagator
    Sublevel-resolved dipole propagators and their two-center expansion.
radial, exact
    Damped radial integrals by quadrature and by incomplete-gamma reduction.
perturbation
    First- and second-order density corrections, contact terms, totals.
cavity
    Lorentz-Lorenz permittivity and cavity-model decay rates.
ensemble
    Monte Carlo resolvent model over random atomic configurations.
cli
    Command-line driver.
"""

from .cavity import CavityModel, decay_rate, permittivity, series_coefficients
from .errors import (
    ConvergenceError,
    DomainError,
    ExpansionUndefinedError,
    LocalFieldError,
    PackingError,
    PoleError,
    SingularityError,
    SolverError,
    UnsupportedOrderError,
)
from .ensemble import (
    EnsembleConfig,
    PhysicalParams,
    ShiftStatistics,
    build_interaction_matrix,
    effective_rate_shift,
    monte_carlo_average,
    sample_positions,
)
from .perturbation import (
    ChannelCoefficient,
    RegularizationPlan,
    channel_coefficient,
    contact_shell_integral,
    contact_term,
    first_order_coefficient,
    reduce_channel_to_radial,
    second_order_channel,
    total_second_order,
)
from .propagator import (
    CHANNELS,
    Channel,
    Displacement,
    angular_kernel,
    propagator_element,
    translate_product,
)
from .specfun import (
    spherical_bessel_j,
    spherical_hankel_h1,
    spherical_harmonic,
    wigner_3j,
)

__version__ = "0.1.0"
