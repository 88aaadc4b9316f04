"""Steepest-entropy-ascent relaxation of occupation probabilities on a finite energy spectrum."""

from .dynamics import LemanskaConfig, lemanska_rhs, sea_rhs, sea_rhs_determinant, sea_rhs_sqrt, variational_check
from .equilibria import (
    EquilibriumSolution,
    Stability,
    classify_stability,
    enumerate_feasible_masks,
    solve_canonical,
    solve_partial,
)
from .errors import ConfigError, ConvergenceError, DegenerateError, InfeasibleError, InvalidStateError, SearelaxError
from .functionals import (
    FunctionalReport,
    beta_alpha,
    covariances,
    entropy,
    entropy_rate,
    entropy_rate_fd,
    gradients,
    massieu_report,
    mean_energy,
)
from .integrator import IntegratorConfig, Trajectory, convergence_report, integrate, integrate_lemanska
from .scenarios import (
    SEVEN_MASKS,
    EsScanConfig,
    PerturbationSpec,
    equilibrium_families,
    es_scan,
    perturb_factors,
    seven_trajectory_study,
)
from .state import (
    Distribution,
    EnergySpectrum,
    OccupationMask,
    SqrtState,
    mask_of,
    to_probs,
    to_sqrt,
    validate_distribution,
)

__all__ = [name for name in dir() if not name.startswith("_")]
