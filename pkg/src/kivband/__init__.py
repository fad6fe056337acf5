"""Kernel instrumental variable regression with uniform bootstrap bands."""

from ._backend import BACKEND
from .bootstrap import (
    BootstrapDraws,
    ConfidenceBand,
    bootstrap_draw,
    bootstrap_quantile,
    bootstrap_reference,
    confidence_band,
    draw_multipliers,
    run_bootstrap,
)
from .dgp import DgpSpec, simulate_iv
from .errors import ConfigError, InputError, NumericalError
from .estimator import Dataset, FitState, RegPair, fit_kiv, fit_krr, predict, regularized_2sls
from .kernels import KernelSpec, eval_kernel, gram_matrix, kendall_disagreements, kernel_bound

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BootstrapDraws",
    "ConfidenceBand",
    "ConfigError",
    "Dataset",
    "DgpSpec",
    "FitState",
    "InputError",
    "KernelSpec",
    "NumericalError",
    "RegPair",
    "bootstrap_draw",
    "bootstrap_quantile",
    "bootstrap_reference",
    "confidence_band",
    "draw_multipliers",
    "eval_kernel",
    "fit_kiv",
    "fit_krr",
    "gram_matrix",
    "kendall_disagreements",
    "kernel_bound",
    "predict",
    "regularized_2sls",
    "run_bootstrap",
    "simulate_iv",
]
