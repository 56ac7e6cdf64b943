"""Sparse kernel learning with per-feature weights in a tensor-product Gaussian kernel.

The model is ``f(x) = sum_i alpha_i k(x, x_i)`` with
``k(x, z) = prod_m (1 + lam_m exp(-(x_m - z_m)^2 / (2 sigma^2)))``. Fitting
alternates a coefficient step with coordinate descent on the weights
``lam`` under a truncated Lasso penalty; features with ``lam_m = 0`` are
dropped from the model.
"""

from .dataset import Dataset
from .errors import RkhselError
from .kernel import KernelSpec, gram, median_bandwidth
from .loss import Task
from .solver import FitConfig, FittedModel, fit, predict
from .tuning import TuningGrid, cross_validate

__all__ = [
    "Dataset",
    "FitConfig",
    "FittedModel",
    "KernelSpec",
    "RkhselError",
    "Task",
    "TuningGrid",
    "cross_validate",
    "fit",
    "gram",
    "median_bandwidth",
    "predict",
]
__version__ = "0.1.0"
