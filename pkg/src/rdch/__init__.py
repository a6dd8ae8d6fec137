"""Solvers and diagnostics for a relaxed degenerate Cahn-Hilliard / generalized
Keller-Segel tissue-growth system, with stiff-pressure and vanishing-relaxation
limit studies."""

from .core import (
    Field,
    Grid,
    GrowthLaw,
    ModelParams,
    StateBundle,
    norm,
    pressure,
    quadrature,
)
from .elliptic import (
    DEFAULT_ELLIPTIC,
    EllipticConfig,
    NonConvergence,
    compute_mu,
    mu_from_potential,
    neumann_laplacian,
    solve_w,
)
from .stepper import (
    DtUnderflow,
    StepConfig,
    Trajectory,
    advance,
    ch_step,
    initial_state,
    ks_step,
    mobility,
    simulate,
    stable_dt,
)
from .diagnostics import (
    BoundsReport,
    DegenerateDensity,
    DiagnosticsRecord,
    IdentitySeries,
    NegativeDensity,
    bounds_report,
    complementarity_residual,
    continuous_dependence,
    energy,
    energy_identity_residual,
    entropy,
    entropy_identity_residual,
)
from .galerkin import (
    GalerkinState,
    GalerkinTrajectory,
    NoAdmissibleRoot,
    SpectralBasis,
    galerkin_energy_residual,
    galerkin_stable_dt,
    galerkin_step,
    project_initial,
    simulate_galerkin,
    solve_d,
)

__version__ = "0.1.0"
