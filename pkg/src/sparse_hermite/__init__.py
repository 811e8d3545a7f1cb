"""Sparse collocation on Gauss-Hermite grids for functions of many Gaussian variables."""
from .adaptive import APrioriWeights, AdaptiveState, b_weight, c_hat, run_aposteriori, run_apriori
from .collocation import (
    HermiteExpansion,
    SparseCollocation,
    ValueStore,
    best_n_term_curve,
    build,
    c_nu_bruteforce,
    delta_apply,
    evaluate,
    to_hermite,
)
from .hermite import (
    GaussHermiteRule,
    gauss_hermite,
    hermite_eval,
    interp_univariate,
    norm_Delta_H,
    norm_U_H,
)
from .lognormal import FieldConfig, LognormalDiffusion, h10_norm, log_diffusion, solve
from .multi_index import (
    MonotoneSet,
    MultiIndex,
    combination_coefficients,
    count_points,
    envelope,
    hc_set,
    leq,
    neighbors,
    sparse_grid_points,
    td_set,
)

__version__ = "0.1.0"
