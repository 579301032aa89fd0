"""Stability toolkit for hydraulic shock profiles of the inviscid Saint-Venant equations."""
from .errors import (
    BranchCollisionError,
    BudgetExceeded,
    CFLError,
    DomainError,
    IntegrationError,
    ResonanceError,
    SingularPointError,
)
from .model import (
    ModelParams,
    State,
    equilibrium_flux,
    flux,
    jacobian_A,
    relaxation_E,
    source,
    symmetrizer_A0,
)
from .evans import (
    EvansConfig,
    ModeVector,
    SeriesExpansion,
    determinant_for,
    evans_lopatinsky,
    evans_smooth,
    evolution_matrix,
    evolve_mode,
    series_seed_and_recurse,
)
from .frequency import (
    SpatialEigenvalues,
    consistent_splitting,
    gamma_minus,
    gamma_plus,
    hf_radius,
    spatial_eigenvalues,
    splitting_boundary,
)
from .fv import Grid, Perturbation, SimConfig, evolve_perturbed, numerical_flux, step
from .profile import (
    Case,
    ProfileFunction,
    ProfileParams,
    ProfileSample,
    check_rankine_hugoniot,
    classify,
    critical_height,
    derive_constants,
    integrate_profile,
    lax_check,
    profile_rhs,
)

from .sweep import SweepSpec, existence_map, sweep
from .winding import (
    Contour,
    StabilityReport,
    build_contour,
    circle_contour,
    stability_verdict,
    winding_details,
    winding_number,
)

__version__ = "0.1.0"
