"""Selection and prediction quality measures, and replicate summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptySupport, IndexOutOfRange
from .loss import Task


@dataclass(frozen=True)
class SelectionReport:
    """Selection accuracy and prediction error of one fit against known truth."""

    tpr: float
    tnr: float
    n_selected: int
    pred_error: float


def selection_metrics(lambda_hat: np.ndarray, threshold: float, true_support, p: int):
    """True positive rate, true negative rate and number of selected features.

    Parameters
    ----------
    lambda_hat : ndarray of shape (p,)
        Fitted kernel weights.
    threshold : float
        Feature ``m`` is selected when ``lambda_hat[m] > threshold``.
    true_support : sequence of int
        0-based indices of the truly important features.
    p : int
        Number of features.

    Returns
    -------
    tuple of (float, float, int)
        ``(tpr, tnr, n_selected)``. ``tnr`` is 1 when the support is the
        whole feature set.
    """
    lam = np.asarray(lambda_hat, dtype=float).reshape(-1)
    if lam.shape[0] != p:
        raise DimensionMismatch(f"lambda_hat has length {lam.shape[0]}, expected {p}")
    support = np.unique(np.asarray(true_support, dtype=int))
    if support.size == 0:
        raise EmptySupport("true support is empty")
    if support.min() < 0 or support.max() >= p:
        raise IndexOutOfRange(f"support indices must lie in [0, {p})")
    selected = lam > threshold
    truth = np.zeros(p, dtype=bool)
    truth[support] = True
    tpr = np.count_nonzero(selected & truth) / support.size
    n_null = p - support.size
    tnr = np.count_nonzero(~selected & ~truth) / n_null if n_null else 1.0
    return float(tpr), float(tnr), int(np.count_nonzero(selected))


def prediction_metrics(task: Task, predictions: np.ndarray, y_true: np.ndarray) -> float:
    """Mean squared error, or misclassification rate of ``sign(prediction)``.

    A score of exactly zero is classified as ``+1``.
    """
    pred = np.asarray(predictions, dtype=float).reshape(-1)
    y = np.asarray(y_true, dtype=float).reshape(-1)
    if pred.shape != y.shape:
        raise DimensionMismatch(f"{pred.shape[0]} predictions for {y.shape[0]} outcomes")
    if Task.parse(task) is Task.REGRESSION:
        r = pred - y
        return float(np.mean(r * r))
    labels = np.where(pred >= 0, 1.0, -1.0)
    return float(np.mean(labels != y))


def mad(values: Sequence[float]) -> float:
    """Median absolute deviation from the median (unscaled)."""
    v = np.asarray(values, dtype=float)
    return float(np.median(np.abs(v - np.median(v))))


def summarize(reports: Sequence[SelectionReport]) -> Dict[str, float]:
    """Replicate means of the rates and counts, plus mean and MAD of the error."""
    if not reports:
        raise ValueError("no reports to summarize")
    err = [r.pred_error for r in reports]
    return {
        "replicates": len(reports),
        "tpr": float(np.mean([r.tpr for r in reports])),
        "tnr": float(np.mean([r.tnr for r in reports])),
        "avg_selected": float(np.mean([r.n_selected for r in reports])),
        "error": float(np.mean(err)),
        "mad": mad(err),
    }
