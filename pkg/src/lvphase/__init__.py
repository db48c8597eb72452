"""Feasibility and stability of equilibria of large random Lotka-Volterra systems.

Desk-scale Monte Carlo reproduction of the feasibility phase transition at
alpha* = sqrt(2 log n), the critical-scaling heuristics, the Jacobian
stability guarantees, and their non-homogeneous / non-Gaussian extensions.
"""

__version__ = "0.1.0"

from .ensembles import (
    EnsembleSpec,
    GrowthVector,
    SeedScheme,
    sample_matrix,
    uniform_growth_vector,
    vector_stats,
)
from .equilibrium import (
    AlphaRule,
    EquilibriumSolution,
    decompose,
    is_feasible,
    largest_singular_value,
    solve_equilibrium,
)
from .evt import (
    EvtConstants,
    empirical_gumbel_check,
    gumbel_cdf,
    gumbel_constants,
    h1,
    h2,
    ldp_tail,
)
from .experiments import (
    CampaignConfig,
    Curve,
    CurvePoint,
    critical_scan,
    feasibility_curve,
    nh_feasibility_curve,
    nh_thresholds,
    savitzky_golay,
    transition_band_width,
)
from .stability import (
    StabilityReport,
    Trajectory,
    jacobian,
    lv_integrate,
    spectrum,
    stability_metrics,
)

__all__ = [
    "AlphaRule",
    "CampaignConfig",
    "Curve",
    "CurvePoint",
    "EnsembleSpec",
    "EquilibriumSolution",
    "EvtConstants",
    "GrowthVector",
    "SeedScheme",
    "StabilityReport",
    "Trajectory",
    "critical_scan",
    "decompose",
    "empirical_gumbel_check",
    "feasibility_curve",
    "gumbel_cdf",
    "gumbel_constants",
    "h1",
    "h2",
    "is_feasible",
    "jacobian",
    "largest_singular_value",
    "ldp_tail",
    "lv_integrate",
    "nh_feasibility_curve",
    "nh_thresholds",
    "sample_matrix",
    "savitzky_golay",
    "solve_equilibrium",
    "spectrum",
    "stability_metrics",
    "transition_band_width",
    "uniform_growth_vector",
    "vector_stats",
]
