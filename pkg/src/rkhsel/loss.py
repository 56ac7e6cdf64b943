"""Squared and exponential losses with per-observation weights."""

from __future__ import annotations

from enum import Enum
from typing import Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidLabel

EXP_CLAMP = 700.0


class Task(str, Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"

    @classmethod
    def parse(cls, value) -> "Task":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown task {value!r}; expected 'regression' or 'classification'")


def _check(task: Task, y: np.ndarray, f: np.ndarray) -> None:
    if y.shape != f.shape:
        raise DimensionMismatch(f"y has shape {y.shape}, f has shape {f.shape}")
    if task is Task.CLASSIFICATION and not np.all((y == 1.0) | (y == -1.0)):
        raise InvalidLabel("classification labels must be -1 or +1")


def observation_weights(task: Task, y: np.ndarray) -> np.ndarray:
    """Unit weights for regression; inverse class frequency (mean one) for classification."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if task is Task.REGRESSION:
        return np.ones(n)
    if not np.all((y == 1.0) | (y == -1.0)):
        raise InvalidLabel("classification labels must be -1 or +1")
    n_pos = int(np.sum(y > 0))
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InvalidLabel("both classes must be present to balance weights")
    return np.where(y > 0, n / (2.0 * n_pos), n / (2.0 * n_neg))


def margin_exponent(y: np.ndarray, f: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Return ``-y * f`` clamped at ``EXP_CLAMP`` and whether any entry was clamped."""
    z = -y * f
    clamped = bool(np.any(z > EXP_CLAMP))
    if clamped:
        z = np.minimum(z, EXP_CLAMP)
    return z, clamped


def loss_value(task: Task, w: np.ndarray, y: np.ndarray, f: np.ndarray) -> float:
    """Weighted empirical risk ``mean(w * l(y, f))``."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    _check(task, y, f)
    if task is Task.REGRESSION:
        r = y - f
        return float(np.mean(w * r * r))
    z, _ = margin_exponent(y, f)
    return float(np.mean(w * np.exp(z)))


def loss_derivatives(
    task: Task, w: np.ndarray, y: np.ndarray, f: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of the weighted pointwise loss in ``f``."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    _check(task, y, f)
    if task is Task.REGRESSION:
        return 2.0 * w * (f - y), 2.0 * np.asarray(w, dtype=float) * np.ones_like(f)
    z, _ = margin_exponent(y, f)
    e = w * np.exp(z)
    return -y * e, e
