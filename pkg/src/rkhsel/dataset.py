from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import LabelError, ShapeError
from .loss import Task


@dataclass
class Dataset:
    """Feature matrix, outcome vector and task tag.

    ``mean`` and ``scale`` record the standardization that maps raw features
    to ``X`` (``X = (raw - mean) / scale``); they are zeros and ones when the
    features were used as-is.
    """

    X: np.ndarray
    y: np.ndarray
    task: Task
    feature_names: List[str] = field(default_factory=list)
    mean: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        self.task = Task.parse(self.task)
        if self.X.ndim != 2:
            raise ShapeError(f"feature matrix must be 2-d, got shape {self.X.shape}")
        if self.X.shape[0] != self.y.shape[0]:
            raise ShapeError(
                f"feature matrix has {self.X.shape[0]} rows but outcome has {self.y.shape[0]}"
            )
        p = self.X.shape[1]
        if not self.feature_names:
            self.feature_names = [f"X{m + 1}" for m in range(p)]
        if len(self.feature_names) != p:
            raise ShapeError(f"{len(self.feature_names)} feature names for {p} columns")
        if self.mean is None:
            self.mean = np.zeros(p)
        if self.scale is None:
            self.scale = np.ones(p)
        self.mean = np.asarray(self.mean, dtype=float)
        self.scale = np.asarray(self.scale, dtype=float)
        if self.task is Task.CLASSIFICATION and not np.all((self.y == 1) | (self.y == -1)):
            raise LabelError("classification labels must be -1 or +1")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.task, list(self.feature_names),
                       self.mean, self.scale)

    def standardize_new(self, raw: np.ndarray) -> np.ndarray:
        """Apply this dataset's standardization to raw feature rows."""
        return (np.asarray(raw, dtype=float) - self.mean) / self.scale

    def raw_features(self) -> np.ndarray:
        return self.X * self.scale + self.mean
