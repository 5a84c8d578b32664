"""branchlab: critical branching processes, coagulation, and their
continuum scaling limits.

The discrete side (gw) carries family-size laws, the coagulation ensemble,
Galton-Watson simulation, and the exact descendant recursion.  The continuum
side (levy, scaling) carries Levy triples, Bernstein transforms, branching
mechanisms, the exponent ODE, and the convergence diagnostics connecting the
two.  The universal module packs countably many limit targets into a single
family law.
"""

from .measures import (
    AtomicMeasure,
    CompactifiedMeasure,
    DEFAULT_Q_GRID,
    DiscreteDistribution,
    convolve_power,
    integrate,
    kappa_distance,
    total_variation,
)
from .levy import (
    ContinuityReport,
    LevyTriple,
    QuadratureRecipe,
    bernstein_value,
    continuity_report,
    feller_triple,
    grey_check,
    kappa_of,
    left_right,
    mechanism,
    mechanism_derivative,
    psi_prime_infinity,
    scale_triple,
    stable_three_halves,
    triple_of,
)
from .gw import (
    CoagulationEnsemble,
    FamilyLaw,
    GWPath,
    GWPaths,
    bernstein_step_residual,
    builtin_law,
    builtin_law_names,
    descendant_distribution,
    discrete_bernstein,
    discrete_mechanism,
    discrete_rates,
    empirical_distribution,
    generating_iterate,
    lamperti_gw,
    make_family_law,
    simulate_coagulation,
    simulate_gw,
    smoluchowski_residual,
)
from .scaling import (
    ExponentTable,
    GrimvallStats,
    Rescaling,
    beta_and_rho,
    damped_smol_residual,
    euler_exponent,
    grimvall_limit_targets,
    grimvall_stats,
    integrate_exponent_ode,
    levy_convergence_report,
    rescaled_gw_laplace,
    rescaled_levy_measure,
    rescaled_mechanism,
    solve_exponent,
)
from .universal import (
    DenseTargetFamily,
    PackResult,
    UniversalSchedule,
    dense_targets,
    law_jump_measure,
    make_schedule,
    pack,
    tail_sandwich,
    universal_csbp_demo,
    universal_family_law,
    universality_demo,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
