"""Statistical finite elements in 1D.

Builds the Gaussian process prior induced on the solution of an elliptic
PDE by a Gaussian source prior, conditions it on noisy point measurements
(optionally with an additive discrepancy kernel), and verifies the
construction against a closed-form Green's-function oracle and empirical
convergence rates.
"""

from .experiments import (
    ExperimentConfig,
    FillMetrics,
    Prop6Report,
    RateTable,
    fill_metrics,
    l2_error,
    matern_baseline,
    prop6_check,
    run_convergence,
    simulate_data,
    theory_slope,
    uniform_points,
)
from .fem import (
    InducedKernel,
    InducedPrior,
    Mesh1D,
    Operator1D,
    assemble_kernel_gram,
    assemble_load,
    assemble_stiffness,
    fem_solve,
)
from .gp import CREDIBLE_95, GPRegressor, condition, condition_with_discrepancy
from .kernels import Kernel, Matern, SumKernel, ZeroKernel, gram, is_psd
from .oracle import green_eval, oracle_Ku, oracle_mu

__version__ = "0.1.0"

__all__ = [
    "CREDIBLE_95",
    "ExperimentConfig",
    "FillMetrics",
    "GPRegressor",
    "InducedKernel",
    "InducedPrior",
    "Kernel",
    "Matern",
    "Mesh1D",
    "Operator1D",
    "Prop6Report",
    "RateTable",
    "SumKernel",
    "ZeroKernel",
    "assemble_kernel_gram",
    "assemble_load",
    "assemble_stiffness",
    "condition",
    "condition_with_discrepancy",
    "fem_solve",
    "fill_metrics",
    "gram",
    "green_eval",
    "is_psd",
    "l2_error",
    "matern_baseline",
    "oracle_Ku",
    "oracle_mu",
    "prop6_check",
    "run_convergence",
    "simulate_data",
    "theory_slope",
    "uniform_points",
]
