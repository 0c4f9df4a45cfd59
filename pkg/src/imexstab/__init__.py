"""Delta-parameterized implicit-explicit multistep schemes and their stability analysis."""
from .schemes import (
    ErrorConstants,
    ImExScheme,
    SchemeError,
    build_scheme,
    error_constants,
    order_condition_residual,
    scheme_from_c_roots,
    tabulated_scheme,
    zero_stability,
)
from .regions import (
    ComplexCurve,
    RegionSummary,
    asymptotic_circle,
    boundary_locus,
    exact_boundary,
    extreme_points,
    g_function,
    member_finite,
    member_infinite,
    member_unconditional,
    region_summary,
)
from .splitting import (
    RangeBoundary,
    Splitting,
    SplittingError,
    StabilityVerdict,
    certify,
    generalized_spectrum,
    largest_stable_delta,
    numerical_range_boundary,
    validate_splitting,
    wp_set,
)
from .stepping import (
    SteppingError,
    SteppingPlan,
    Trajectory,
    companion_matrix,
    empirical_stability,
    exact_start_plan,
    global_error,
    run,
)
from .problems import (
    ConvergenceReport,
    catalog_problem,
    chebyshev_grid,
    convergence_study,
    diffusion_splitting,
    gte_study,
    manufactured_forcing,
    scalar_problem,
)

__version__ = "0.1.0"
