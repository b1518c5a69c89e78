"""pamcat: a numerical laboratory for the parabolic Anderson equation

    du/dt = kappa * Delta u + xi u   on Z^d,

with a catalytic medium xi built from a Poisson field of independent random
walkers.  The package computes the closed-form exponent layer (lattice Green
constants, principal eigenvalues of delta potentials, regime classification),
solves the annealed moment PDE and its Volterra reduction, estimates the
annealed growth rates by Feynman-Kac Monte Carlo, and evaluates the radial
polaron variational constant entering the large-diffusivity asymptote.
"""

__version__ = "0.1.0"

from .errors import DomainError, NumericalError
from .params import ModelParams, check_dimension
from .fields import LatticeField, box_sites, flat_index
from .lattice_green import (
    INF,
    QuadratureConfig,
    green_tail,
    green_tail_bound_constant,
    heat_kernel,
    phi_hat,
    r_d,
    resolvent_R,
    resolvent_routes,
)
from .spectral import (
    IntermittencyVerdict,
    Interval,
    RegimeReport,
    classify_regimes,
    eigen_residual,
    eigenfunction_e,
    hat_lambda_p,
    kappa_infinity_asymptote,
    lambda_p_bounds,
    lambda_p_zero,
    mu_of_r,
    rayleigh_ritz_value,
)
from .cauchy import (
    Boundary,
    BoxConfig,
    Path,
    TrajectorySet,
    default_dt,
    duhamel_residual,
    pinned_trajectory,
    solve_w,
    solve_w_bar,
    solve_w_bar_volterra,
    w_bar_limit,
)
from .feynman_kac import (
    CatalystField,
    McConfig,
    McEstimate,
    default_box_radius,
    estimate_Lambda_p,
    estimate_Lambda_p_pinned,
    exceedance_set,
    rescaled_params,
    sample_catalyst_field,
    sample_srw,
    scaling_identity_check,
    simulate_quenched_u,
    substream,
)
from .polaron import (
    P_p_full,
    P_p_truncated,
    PolaronResult,
    RadialGrid,
    RadialProfile,
    coulomb_energy,
    coupling_coefficient,
    gradient_energy,
    maximize_P,
    truncated_kernel_energy,
)
