"""Cross-validated choice of the two penalty parameters over a dyadic grid."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dataset import Dataset
from .errors import DegenerateData
from .kernel import feature_grams, median_bandwidth
from .loss import Task
from .metrics import prediction_metrics
from .solver import FitConfig, FittedModel, fit, predict

FULL_EXPONENTS = tuple(range(-15, 16, 2))
COARSE_EXPONENTS = FULL_EXPONENTS[::2]


@dataclass(frozen=True)
class TuningGrid:
    """Candidate values for ``gamma1`` and ``gamma2`` and the fold count."""

    gamma1_values: Sequence[float]
    gamma2_values: Sequence[float]
    folds: int = 3

    def __post_init__(self):
        g1 = tuple(float(v) for v in self.gamma1_values)
        g2 = tuple(float(v) for v in self.gamma2_values)
        if not g1 or not g2:
            raise ValueError("grid must contain at least one value of each parameter")
        for name, vals in (("gamma1", g1), ("gamma2", g2)):
            if any(not v > 0 for v in vals):
                raise ValueError(f"{name} values must be positive")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} values must be strictly ascending")
        if self.folds < 2:
            raise ValueError(f"folds must be at least 2, got {self.folds}")
        object.__setattr__(self, "gamma1_values", g1)
        object.__setattr__(self, "gamma2_values", g2)

    @classmethod
    def dyadic(cls, kind: str = "full", folds: int = 3) -> "TuningGrid":
        """Odd powers of two from ``2**-15`` to ``2**15``; ``"coarse"`` keeps every other one."""
        if kind == "full":
            exps = FULL_EXPONENTS
        elif kind == "coarse":
            exps = COARSE_EXPONENTS
        else:
            raise ValueError(f"unknown grid {kind!r}; expected 'full' or 'coarse'")
        vals = [2.0 ** e for e in exps]
        return cls(vals, vals, folds)


@dataclass
class CVResult:
    best_gamma1: float
    best_gamma2: float
    model: FittedModel
    cv_table: np.ndarray
    fold_scores: np.ndarray
    folds: np.ndarray
    sigma: float
    grid: TuningGrid = field(repr=False, default=None)

    def __iter__(self):
        return iter((self.best_gamma1, self.best_gamma2, self.model, self.cv_table))


def make_folds(y: np.ndarray, k: int, task: Task, rng: np.random.Generator) -> np.ndarray:
    """Fold label in ``0..k-1`` for every observation.

    Indices are shuffled and dealt round-robin, so fold sizes differ by at
    most one. Classification deals each class in turn to stratify by label.
    """
    n = len(y)
    if n < k:
        raise DegenerateData(f"need at least {k} observations for {k} folds, got {n}")
    if task is Task.CLASSIFICATION:
        order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in (-1.0, 1.0)])
    else:
        order = rng.permutation(n)
    folds = np.empty(n, dtype=int)
    folds[order] = np.arange(n) % k
    return folds


# Per-process state for the worker pool; the main process uses it too.
_STATE = {}


def _init(data: Dataset, folds: np.ndarray, sigma: float, config: FitConfig) -> None:
    _STATE.clear()
    _STATE.update(data=data, folds=folds, sigma=sigma, config=config, grams={})


def _score(job):
    g1, g2, k = job
    data = _STATE["data"]
    folds = _STATE["folds"]
    train = data.subset(folds != k)
    test = data.subset(folds == k)
    grams = _STATE["grams"].get(k)
    if grams is None:
        grams = _STATE["grams"][k] = feature_grams(train.X, train.X, _STATE["sigma"])
    model = fit(train, _STATE["config"].with_gammas(g1, g2), _STATE["sigma"], grams)
    return prediction_metrics(data.task, predict(model, test.X), test.y)


def default_workers() -> int:
    env = os.environ.get("RKHSEL_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cross_validate(
    data: Dataset,
    grid: TuningGrid,
    config: FitConfig = FitConfig(),
    rng: Optional[np.random.Generator] = None,
    workers: int = 1,
    sigma: Optional[float] = None,
) -> CVResult:
    """Pick ``(gamma1, gamma2)`` by k-fold cross-validation and refit on all data.

    Parameters
    ----------
    data : Dataset
        Training data.
    grid : TuningGrid
        Candidate values and fold count.
    config : FitConfig
        Settings shared by every fit; its gammas are overridden per cell.
    rng : numpy.random.Generator, optional
        Source of the fold shuffle.
    workers : int
        Number of processes; fits are deterministic, so the result does not
        depend on this.
    sigma : float, optional
        Bandwidth; the median heuristic on all of ``data`` if omitted. It is
        held fixed across folds and cells.

    Returns
    -------
    CVResult
        The winning cell minimizes the mean held-out error (squared error or
        misclassification rate); ties go to the larger ``gamma2``, then the
        larger ``gamma1``.
    """
    rng = np.random.default_rng() if rng is None else rng
    k = grid.folds
    folds = make_folds(data.y, k, data.task, rng)
    if data.task is Task.CLASSIFICATION:
        for j in range(k):
            if len(np.unique(data.y[folds != j])) < 2:
                raise DegenerateData(f"training part of fold {j} lacks one of the classes")
    if sigma is None:
        sigma = median_bandwidth(data.X, per_feature=config.bandwidth == "per-feature")

    g1s, g2s = grid.gamma1_values, grid.gamma2_values
    # fold-major order keeps a worker's cached Gram stack hot
    jobs = [(g1, g2, j) for j in range(k) for g1 in g1s for g2 in g2s]
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init,
                                 initargs=(data, folds, sigma, config)) as pool:
            scores = list(pool.map(_score, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        _init(data, folds, sigma, config)
        try:
            scores = [_score(job) for job in jobs]
        finally:
            _STATE.clear()

    fold_scores = np.array(scores).reshape(k, len(g1s), len(g2s)).transpose(1, 2, 0)
    table = fold_scores.mean(axis=2)
    best = None
    for i in range(len(g1s)):
        for j in range(len(g2s)):
            key = (table[i, j], -j, -i)
            if best is None or key < best[0]:
                best = (key, i, j)
    _, bi, bj = best
    model = fit(data, config.with_gammas(g1s[bi], g2s[bj]), sigma)
    return CVResult(g1s[bi], g2s[bj], model, table, fold_scores, folds, sigma, grid)
