"""Executable Gaussian theory of offset debiasing.

Closed-form accuracies, the optimal offset ratio, the high-dimensional
reduction, and a sharded Monte Carlo oracle that checks all of them.
"""

from .gaussian import (
    DEFAULT_BETA_GRID,
    GaussianWorld,
    acc_gain,
    acc_no_offset,
    acc_with_offset,
    beta_sweep,
    optimal_beta,
    reduce_high_d,
    residual_corruption_scale,
)
from .montecarlo import MonteCarloEstimate, mc_accuracy
from .verify import (
    CSV_COLUMNS,
    DEFAULT_R_GRID,
    DEFAULT_S_GRID,
    VerificationRow,
    VerificationSummary,
    grid_argmax_beta,
    theorem_betas,
    verify_grid,
)

__all__ = [
    "CSV_COLUMNS",
    "DEFAULT_BETA_GRID",
    "DEFAULT_R_GRID",
    "DEFAULT_S_GRID",
    "GaussianWorld",
    "MonteCarloEstimate",
    "VerificationRow",
    "VerificationSummary",
    "acc_gain",
    "acc_no_offset",
    "acc_with_offset",
    "beta_sweep",
    "grid_argmax_beta",
    "mc_accuracy",
    "optimal_beta",
    "reduce_high_d",
    "residual_corruption_scale",
    "theorem_betas",
    "verify_grid",
]
