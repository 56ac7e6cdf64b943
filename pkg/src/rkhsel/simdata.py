"""Synthetic regression and classification designs with known supports.

Feature indices are 0-based in code: study one's signal lives in features
0..4 and study two's in features 1..3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .dataset import Dataset
from .errors import InvalidDimension
from .loss import Task
from .numerics import sample_correlated_gaussian

STUDY1_PAIRS = [(0, 1, 0.4), (0, 2, -0.3), (1, 2, 0.5), (2, 3, 0.2)]
# The source design lists corr(X3, X4) twice (0.3 and -0.4); the first is kept.
STUDY2_PAIRS = [(0, 1, -0.2), (0, 3, 0.2), (1, 2, 0.5), (2, 3, 0.3)]
STUDY1_SUPPORT = np.arange(0, 5)
STUDY2_SUPPORT = np.arange(1, 4)
DEFAULT_N_VALID = 2000


@dataclass
class SimInstance:
    train: Dataset
    validation: Dataset
    true_support: np.ndarray
    study: int


def study1_mean(X: np.ndarray) -> np.ndarray:
    """Noise-free regression function ``0.9 x5^3 + 4 x1 x2 x3 + 2.3 exp(-x3) + 4 x4``."""
    X = np.asarray(X, dtype=float)
    return (0.9 * X[:, 4] ** 3 + 4.0 * X[:, 0] * X[:, 1] * X[:, 2]
            + 2.3 * np.exp(-X[:, 2]) + 4.0 * X[:, 3])


def study2_index(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[:, 1] - 1.1 * X[:, 2] + 0.3 * X[:, 3]


def study2_prob(X: np.ndarray) -> np.ndarray:
    """``P(Y = +1 | X) = 1 / (1 + exp(-0.25 + c^3))`` with ``c = x2 - 1.1 x3 + 0.3 x4``."""
    c = study2_index(X)
    return expit(0.25 - c ** 3)


def _draw_study1(n, p, rng):
    X = sample_correlated_gaussian(n, p, STUDY1_PAIRS, rng)
    eps = rng.standard_normal(n)
    return Dataset(X, study1_mean(X) + eps, Task.REGRESSION)


def _draw_study2(n, p, rng):
    X = sample_correlated_gaussian(n, p, STUDY2_PAIRS, rng)
    u = rng.random(n)
    y = np.where(u < study2_prob(X), 1.0, -1.0)
    return Dataset(X, y, Task.CLASSIFICATION)


def generate_study1(n: int, p: int, n_valid: int = DEFAULT_N_VALID,
                    rng: np.random.Generator = None) -> SimInstance:
    """Correlated Gaussian features with a nonlinear regression outcome and N(0, 1) noise."""
    if p < 5:
        raise InvalidDimension(f"study 1 needs p >= 5, got {p}")
    rng = np.random.default_rng() if rng is None else rng
    train = _draw_study1(n, p, rng)
    valid = _draw_study1(n_valid, p, rng)
    return SimInstance(train, valid, STUDY1_SUPPORT.copy(), 1)


def generate_study2(n: int, p: int, n_valid: int = DEFAULT_N_VALID,
                    rng: np.random.Generator = None) -> SimInstance:
    """Correlated Gaussian features with a Bernoulli outcome in {-1, +1}."""
    if p < 4:
        raise InvalidDimension(f"study 2 needs p >= 4, got {p}")
    rng = np.random.default_rng() if rng is None else rng
    train = _draw_study2(n, p, rng)
    valid = _draw_study2(n_valid, p, rng)
    return SimInstance(train, valid, STUDY2_SUPPORT.copy(), 2)


def generate(study: int, n: int, p: int, n_valid: int = DEFAULT_N_VALID,
             rng: np.random.Generator = None) -> SimInstance:
    if study == 1:
        return generate_study1(n, p, n_valid, rng)
    if study == 2:
        return generate_study2(n, p, n_valid, rng)
    raise ValueError(f"unknown study {study}; expected 1 or 2")
