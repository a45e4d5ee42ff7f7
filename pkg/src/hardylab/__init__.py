"""Sharp-constant laboratory for the weighted averaging operator

    H_m f(t) = t^(-1-m/2) * integral_0^t f(s) s^(m/2) ds

on L^p(0, inf): exact norms of I - lambda*H_m, extremal families,
majorization certificates, and the martingale models behind them.
"""

from ._backend import get_backend
from .constants import (
    Branch,
    ConstantResult,
    Params,
    alpha_star,
    C_p,
    c_ratio,
    conjectured_value,
    gamma,
    generic_constant,
    optimize_ratio,
    sharp_constant,
)
from .bellman import (
    CertBranch,
    SpecialFnSpec,
    U_eval,
    V_eval,
    ViolationReport,
    build_special_fn,
    check_burkholder_conditions,
    check_double_tangent,
    check_majorization,
    find_tangencies,
    inflection_interval,
    with_constant,
)
from .errors import (
    BracketError,
    BranchError,
    DivergenceError,
    ExponentDomainError,
    FeasibilityError,
    GenerationError,
    HardyLabError,
    NonConvergenceError,
    ParameterDomainError,
    TangencyError,
)
from .hardy import (
    ComplexBoundReport,
    NoninvertibilityWitness,
    PiecewisePowerFn,
    PowerPiece,
    SampledFn,
    apply_Hm_closed,
    apply_Hm_sampled,
    extremal_family,
    hardy_norm_witness,
    lp_norm_closed,
    lp_norm_sampled,
    noninvertibility_witness,
    ratio_extremal,
    residual_closed,
    sample,
    verify_complex_bound,
)
from .martingale import (
    ExtremalMartingale,
    MartingaleNode,
    SimpleMartingale,
    extremal_ratio_exact,
    extremal_tree,
    fuzz_rows,
    limit_ratio,
    maximal_ratio,
    random_simple_martingale,
    terminal_distribution,
    verify_maximal_inequality,
)
from .numerics import (
    Bracket,
    OptConfig,
    OptResult,
    QuadResult,
    RootResult,
    brent_root,
    find_root_bracketed,
    integrate_adaptive,
    maximize_2d,
    maximize_scalar,
    quad_result,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "get_backend",
    # constants
    "Branch",
    "ConstantResult",
    "Params",
    "alpha_star",
    "C_p",
    "c_ratio",
    "conjectured_value",
    "gamma",
    "generic_constant",
    "optimize_ratio",
    "sharp_constant",
    # bellman
    "CertBranch",
    "SpecialFnSpec",
    "U_eval",
    "V_eval",
    "ViolationReport",
    "build_special_fn",
    "check_burkholder_conditions",
    "check_double_tangent",
    "check_majorization",
    "find_tangencies",
    "inflection_interval",
    "with_constant",
    # errors
    "BracketError",
    "BranchError",
    "DivergenceError",
    "ExponentDomainError",
    "FeasibilityError",
    "GenerationError",
    "HardyLabError",
    "NonConvergenceError",
    "ParameterDomainError",
    "TangencyError",
    # hardy
    "ComplexBoundReport",
    "NoninvertibilityWitness",
    "PiecewisePowerFn",
    "PowerPiece",
    "SampledFn",
    "apply_Hm_closed",
    "apply_Hm_sampled",
    "extremal_family",
    "hardy_norm_witness",
    "lp_norm_closed",
    "lp_norm_sampled",
    "noninvertibility_witness",
    "ratio_extremal",
    "residual_closed",
    "sample",
    "verify_complex_bound",
    # martingale
    "ExtremalMartingale",
    "MartingaleNode",
    "SimpleMartingale",
    "extremal_ratio_exact",
    "extremal_tree",
    "fuzz_rows",
    "limit_ratio",
    "maximal_ratio",
    "random_simple_martingale",
    "terminal_distribution",
    "verify_maximal_inequality",
    # numerics
    "Bracket",
    "OptConfig",
    "OptResult",
    "QuadResult",
    "RootResult",
    "brent_root",
    "find_root_bracketed",
    "integrate_adaptive",
    "maximize_2d",
    "maximize_scalar",
    "quad_result",
]
