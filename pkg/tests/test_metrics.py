import numpy as np
import pytest

from rkhsel.errors import DimensionMismatch, EmptySupport, IndexOutOfRange
from rkhsel.loss import Task
from rkhsel.metrics import SelectionReport, mad, prediction_metrics, selection_metrics, summarize

SUPPORT = [0, 1, 2, 3, 4]


def test_partial_selection():
    lam = np.zeros(10)
    lam[[0, 1, 2]] = 1.0
    assert selection_metrics(lam, 1e-10, SUPPORT, 10) == (0.6, 1.0, 3)


def test_nothing_selected():
    assert selection_metrics(np.zeros(10), 1e-10, SUPPORT, 10) == (0.0, 1.0, 0)


def test_everything_selected():
    assert selection_metrics(np.ones(10), 1e-10, SUPPORT, 10) == (1.0, 0.0, 10)


def test_threshold_is_strict():
    lam = np.array([1e-10, 2e-10, 0.0])
    assert selection_metrics(lam, 1e-10, [0], 3) == (0.0, 0.5, 1)


def test_selection_errors():
    with pytest.raises(EmptySupport):
        selection_metrics(np.zeros(3), 1e-10, [], 3)
    with pytest.raises(DimensionMismatch):
        selection_metrics(np.zeros(3), 1e-10, [0], 4)
    with pytest.raises(IndexOutOfRange):
        selection_metrics(np.zeros(3), 1e-10, [3], 3)


def test_rates_are_counts_over_set_sizes(rng):
    for _ in range(20):
        p = int(rng.integers(2, 30))
        support = rng.choice(p, size=int(rng.integers(1, p)), replace=False)
        lam = np.where(rng.uniform(size=p) < 0.4, rng.uniform(size=p), 0.0)
        tpr, tnr, k = selection_metrics(lam, 1e-10, support, p)
        assert 0 <= tpr <= 1 and 0 <= tnr <= 1 and k <= p
        assert np.isclose(tpr * len(support), round(tpr * len(support)))
        assert np.isclose(tnr * (p - len(support)), round(tnr * (p - len(support))))


def test_prediction_metrics():
    y = np.array([1.0, 2.0, 3.0])
    assert prediction_metrics(Task.REGRESSION, y, y) == 0.0
    assert prediction_metrics(Task.REGRESSION, np.zeros(2), np.array([1.0, 3.0])) == 5.0
    assert prediction_metrics(Task.CLASSIFICATION, np.array([1.0, -1.0]), np.ones(2)) == 0.5
    assert prediction_metrics(Task.CLASSIFICATION, np.array([0.0]), np.ones(1)) == 0.0
    with pytest.raises(DimensionMismatch):
        prediction_metrics(Task.REGRESSION, np.zeros(2), np.zeros(3))


def test_summary():
    reports = [SelectionReport(1.0, 0.9, 6, 2.0), SelectionReport(0.6, 1.0, 3, 4.0),
               SelectionReport(0.8, 1.0, 4, 9.0)]
    s = summarize(reports)
    assert np.isclose(s["tpr"], 0.8) and np.isclose(s["tnr"], 29 / 30)
    assert np.isclose(s["avg_selected"], 13 / 3) and s["error"] == 5.0
    assert s["mad"] == 2.0
    assert mad([1.0, 1.0, 1.0]) == 0.0
    with pytest.raises(ValueError):
        summarize([])
