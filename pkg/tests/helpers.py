"""Small random instances and brute-force oracles shared by the tests."""

import itertools

import numpy as np

from rkhsel.dataset import Dataset
from rkhsel.kernel import KernelSpec, build_product_cache, coordinate_profile, gram
from rkhsel.loss import Task, loss_value, observation_weights
from rkhsel.solver import (
    FitConfig,
    alpha_gradient,
    alpha_step_regression,
    lambda_coordinate_step,
    objective,
    truncated_penalty,
)


def random_labels(rng, n):
    y = rng.choice([-1.0, 1.0], n)
    y[0], y[1] = 1.0, -1.0
    return y


def random_instance(rng, task, n_max=15, p_max=4):
    """Random data, weights, kernel weights and coefficients for one coordinate problem."""
    n = int(rng.integers(2, n_max + 1))
    p = int(rng.integers(1, p_max + 1))
    X = rng.standard_normal((n, p))
    if task is Task.REGRESSION:
        y = rng.standard_normal(n) * 2.0
        y -= y.mean()
    else:
        y = random_labels(rng, n)
    w = observation_weights(task, y)
    lam = np.where(rng.uniform(size=p) < 0.3, 0.0, rng.uniform(0, 3, p))
    sigma = float(rng.uniform(0.5, 2.0))
    alpha = rng.normal(scale=0.3, size=n)
    return X, y, w, lam, sigma, alpha


def coordinate_objective(X, y, w, task, lam, sigma, alpha, q, t, gamma1, gamma2, bound):
    """The one-coordinate objective recomputed from a fresh Gram matrix."""
    lt = np.array(lam, dtype=float)
    lt[q] = t
    K = gram(X, X, KernelSpec(lt, sigma, bound))
    f = K @ alpha
    return (loss_value(task, w, y, f) + gamma1 * float(alpha @ f)
            + gamma2 * truncated_penalty(lt, bound))


def branch_grid(bound, step=1e-4, span=None):
    """Grid of ``[0, M/2)`` plus ``[M/2, M]`` at resolution ``step``.

    The full box is too long to scan at this resolution when ``M`` is large,
    so each branch is scanned on its first ``span`` units together with
    the right endpoint; ``span`` defaults to covering the whole branch.
    """
    half = bound / 2.0
    if span is None or span >= half:
        a = np.arange(0.0, half, step)
        b = np.append(np.arange(half, bound, step), bound)
    else:
        a = np.append(np.arange(0.0, span, step), np.nextafter(half, 0.0))
        b = np.append(np.arange(half, half + span, step), bound)
    return np.concatenate([a, b])


def profile_values(prof, y, w, task, ts, gamma1, gamma2, bound):
    """Vectorized coordinate objective over ``ts`` from the affine profile."""
    n = len(y)
    F = prof.a[None, :] + np.outer(ts, prof.b)
    if task is Task.REGRESSION:
        L = ((y[None, :] - F) ** 2 * w[None, :]).sum(axis=1) / n
    else:
        L = (np.exp(np.minimum(-y[None, :] * F, 700.0)) * w[None, :]).sum(axis=1) / n
    pen = np.where(ts < bound / 2.0, ts, 0.0)
    return L + gamma1 * (prof.const + prof.v * ts) + gamma2 * pen


def alpha_objective(P, y, w, task, alpha, gamma1):
    f = P @ alpha
    return loss_value(task, w, y, f) + gamma1 * float(alpha @ f)


def study_like_regression(rng, n, p):
    X = rng.standard_normal((n, p))
    y = np.sin(2 * X[:, 0]) + X[:, min(1, p - 1)] ** 2 + 0.1 * rng.standard_normal(n)
    return Dataset(X, y, Task.REGRESSION)


def study_like_classification(rng, n, p):
    X = rng.standard_normal((n, p))
    y = np.where(X[:, 0] + 0.5 * X[:, min(1, p - 1)] ** 2 + 0.3 * rng.standard_normal(n) > 0.4,
                 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    return Dataset(X, y, Task.CLASSIFICATION)
