"""Alternating minimization of the penalized kernel risk.

Each outer iteration makes one pass of the kernel-coefficient step (closed
form for squared loss, damped Newton for exponential loss) followed by one
cyclic coordinate-descent sweep over the kernel weights. The truncated
Lasso penalty ``gamma2 * sum(lam * (lam < bound / 2))`` is handled by
minimizing each coordinate separately on its two convex branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .dataset import Dataset
from .errors import DegenerateData, DimensionMismatch
from .kernel import (
    CoordinateProfile,
    KernelSpec,
    ProductCache,
    build_product_cache,
    coordinate_profile,
    feature_grams,
    gram,
    median_bandwidth,
)
from .loss import (
    EXP_CLAMP,
    Task,
    loss_derivatives,
    loss_value,
    margin_exponent,
    observation_weights,
)
from .numerics import DEFAULT_JITTER, JitterPolicy, minimize_convex_1d, solve_spd

# "full": median distance between whole feature vectors; "per-feature":
# median of the pooled per-coordinate distances.
BANDWIDTH_RULES = ("full", "per-feature")

# Above this many bytes the per-feature Gram stack is computed on demand.
GRAM_STACK_LIMIT = 1 << 30


@dataclass(frozen=True)
class FitConfig:
    """Tuning parameters, box bound and stopping rules for :func:`fit`."""

    gamma1: float = 2.0 ** -7
    gamma2: float = 2.0 ** -7
    bound: float = 1e5
    cut_obj: float = 1e-5
    cut_lambda: float = 1e-4
    max_outer: int = 100
    newton_backtracks: int = 30
    select_threshold: float = 1e-10
    coord_tol: float = 1e-8
    polish: bool = True
    bandwidth: str = "full"
    jitter: JitterPolicy = DEFAULT_JITTER

    def __post_init__(self):
        if not self.gamma1 > 0:
            raise ValueError(f"gamma1 must be positive, got {self.gamma1}")
        if not self.gamma2 >= 0:
            raise ValueError(f"gamma2 must be nonnegative, got {self.gamma2}")
        if not self.bound > 0:
            raise ValueError(f"bound must be positive, got {self.bound}")
        if not (0 < self.cut_obj < 1 and 0 < self.cut_lambda < 1):
            raise ValueError("cut points must lie in (0, 1)")
        if self.max_outer < 1 or self.newton_backtracks < 0:
            raise ValueError("max_outer must be >= 1 and newton_backtracks >= 0")
        if self.bandwidth not in BANDWIDTH_RULES:
            raise ValueError(f"bandwidth must be one of {BANDWIDTH_RULES}, got {self.bandwidth!r}")

    def with_gammas(self, gamma1: float, gamma2: float) -> "FitConfig":
        return replace(self, gamma1=gamma1, gamma2=gamma2)


@dataclass
class FittedModel:
    spec: KernelSpec
    alpha: np.ndarray
    train_X: np.ndarray
    task: Task
    y_center: float
    weights: np.ndarray
    trace: List[float]
    config: FitConfig = field(default_factory=FitConfig)
    converged: bool = False
    n_iter: int = 0
    exp_clamped: bool = False
    feature_names: List[str] = field(default_factory=list)
    mean: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None

    @property
    def lam(self) -> np.ndarray:
        return self.spec.lam

    @property
    def selected(self) -> np.ndarray:
        """0-based indices of features with weight above the selection threshold."""
        return np.flatnonzero(self.spec.lam > self.config.select_threshold)

    def decision_function(self, X_new: np.ndarray) -> np.ndarray:
        return predict(self, X_new)

    def predict_labels(self, X_new: np.ndarray) -> np.ndarray:
        return np.where(predict(self, X_new) >= 0, 1.0, -1.0)


def truncated_penalty(lam: np.ndarray, bound: float) -> float:
    lam = np.asarray(lam, dtype=float)
    return float(np.sum(lam[lam < bound / 2.0]))


def objective(
    alpha: np.ndarray,
    cache: ProductCache,
    y: np.ndarray,
    weights: np.ndarray,
    task: Task,
    config: FitConfig,
) -> float:
    """Penalized risk: weighted loss + gamma1 * alpha'P alpha + gamma2 * truncated Lasso.

    ``y`` is the working outcome (centered for regression).
    """
    f = cache.P @ alpha
    return (
        loss_value(task, weights, y, f)
        + config.gamma1 * float(alpha @ f)
        + config.gamma2 * truncated_penalty(cache.lam, config.bound)
    )


def _alpha_objective(task, weights, y, alpha, f, gamma1) -> float:
    return loss_value(task, weights, y, f) + gamma1 * float(alpha @ f)


def alpha_gradient(
    cache: ProductCache,
    y: np.ndarray,
    weights: np.ndarray,
    task: Task,
    alpha: np.ndarray,
    gamma1: float,
) -> np.ndarray:
    """Gradient in ``alpha`` of the coefficient-step objective."""
    f = cache.P @ alpha
    g, _ = loss_derivatives(task, weights, y, f)
    return cache.P @ (g / len(y) + 2.0 * gamma1 * alpha)


def alpha_step_regression(
    cache: ProductCache,
    y_centered: np.ndarray,
    gamma1: float,
    policy: JitterPolicy = DEFAULT_JITTER,
) -> np.ndarray:
    """Closed-form coefficient update for squared loss.

    Solves ``(P + n gamma1 I) alpha = y``. Multiplying through by ``P``
    gives the normal equations ``(P'P + n gamma1 P) alpha = P'y``, so the
    result minimizes the same objective while avoiding the squared
    condition number; it stays well defined when ``P`` is singular.
    """
    if not gamma1 > 0:
        raise ValueError("gamma1 must be positive")
    n = cache.n
    A = cache.P + (n * gamma1) * np.eye(n)
    return solve_spd(A, y_centered, policy)


def alpha_step_classification(
    cache: ProductCache,
    y: np.ndarray,
    weights: np.ndarray,
    alpha0: np.ndarray,
    gamma1: float,
    backtracks: int = 30,
    policy: JitterPolicy = DEFAULT_JITTER,
) -> np.ndarray:
    """One damped Newton step on the exponential-loss coefficient objective.

    The gradient is ``P r`` with ``r = g/n + 2 gamma1 alpha`` and the Hessian
    ``P (D/n) P + 2 gamma1 P``. The Newton direction ``d`` is obtained from
    the equivalent symmetric system ``(S P S + 2 gamma1 I) S^{-1} d = S^{-1} r``
    with ``S = diag(sqrt(h/n))``, which needs no inverse of ``P``. Step sizes
    ``1, 1/2, ...`` are tried until the objective does not increase.
    """
    P = cache.P
    n = cache.n
    alpha0 = np.asarray(alpha0, dtype=float)
    f0 = P @ alpha0
    g, h = loss_derivatives(Task.CLASSIFICATION, weights, y, f0)
    r = g / n + 2.0 * gamma1 * alpha0
    if not np.any(P @ r):
        return alpha0
    h = np.maximum(h, max(float(h.max()) * 1e-12, 1e-300))
    s = np.sqrt(h / n)
    A = s[:, None] * P * s[None, :]
    A[np.diag_indices_from(A)] += 2.0 * gamma1
    d = s * solve_spd(A, r / s, policy)
    if not np.all(np.isfinite(d)):
        return alpha0

    J0 = _alpha_objective(Task.CLASSIFICATION, weights, y, alpha0, f0, gamma1)
    Pd = P @ d
    t = 1.0
    for _ in range(backtracks + 1):
        alpha = alpha0 - t * d
        f = f0 - t * Pd
        if _alpha_objective(Task.CLASSIFICATION, weights, y, alpha, f, gamma1) <= J0:
            return alpha
        t *= 0.5
    return alpha0


def lambda_coordinate_step(
    profile: CoordinateProfile,
    y: np.ndarray,
    weights: np.ndarray,
    task: Task,
    gamma1: float,
    gamma2: float,
    bound: float,
    current: Optional[float] = None,
    tol: float = 1e-8,
) -> float:
    """Minimize the penalized risk over one kernel weight on ``[0, bound]``.

    The one-dimensional objective is
    ``loss(a + b t) + gamma1 v t + gamma2 t 1(t < bound/2)``; it is convex on
    each of ``[0, bound/2]`` and ``[bound/2, bound]``. Both branches are
    solved and the better point is returned, preferring the smaller weight
    on ties. If ``current`` is given and strictly better, it is kept.
    """
    half = bound / 2.0
    v = max(profile.v, 0.0)
    a, b = profile.a, profile.b
    n = y.shape[0]

    if task is Task.REGRESSION:
        r = y - a
        wb = weights * b
        den = float(wb @ b)
        cross = float(wb @ r)
        wr = float((weights * r) @ r)

        def branch(slope):
            def val(t):
                return (wr - 2.0 * t * cross + t * t * den) / n + slope * t
            return val
    else:
        za = -y * a
        zb = -y * b
        wzb = weights * zb

        def branch(slope):
            def val(t):
                z = np.minimum(za + zb * t, EXP_CLAMP)
                return float(weights @ np.exp(z)) / n + slope * t

            def grad(t):
                # factor out the largest exponent so that terms of both signs
                # cannot overflow to inf - inf; only the sign matters here
                z = np.minimum(za + zb * t, EXP_CLAMP)
                top = float(z.max())
                return float(wzb @ np.exp(z - top)) * math.exp(top) / n + slope
            val.grad = grad
            return val

    def h(t):
        return branch(gamma1 * v + (gamma2 if t < half else 0.0))(t)

    best, best_val = None, math.inf
    if current is not None:
        cur_val = h(current)
    else:
        cur_val = math.inf
    for lo, hi, slope in ((0.0, half, gamma1 * v + gamma2), (half, bound, gamma1 * v)):
        g = branch(slope)
        if task is Task.REGRESSION:
            if den > 0:
                t = min(max((cross - n * slope / 2.0) / den, lo), hi)
            else:
                t = lo
        else:
            # tangent at lo bounds a convex branch from below
            floor = g(lo) + min(0.0, g.grad(lo)) * (hi - lo)
            if floor > min(best_val, cur_val):
                continue
            t = minimize_convex_1d(g, lo, hi, tol, grad=g.grad)
        val = h(t)
        if val < best_val or (val == best_val and t < best):
            best, best_val = t, val

    if cur_val < best_val:
        return float(current)
    return float(best)


def _initial_lambda(task: Task, X: np.ndarray, y: np.ndarray, bound: float) -> np.ndarray:
    lam = np.zeros(X.shape[1])
    if task is Task.CLASSIFICATION:
        Xc = X - X.mean(axis=0)
        yc = y - y.mean()
        denom = np.sqrt(np.sum(Xc * Xc, axis=0) * np.sum(yc * yc))
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.where(denom > 0, (Xc.T @ yc) / denom, 0.0)
        lam[int(np.argmax(np.abs(corr)))] = min(1.0, bound)
    return lam


class _Fitter:
    """Mutable optimizer state for a single call to :func:`fit`."""

    def __init__(self, X, y, weights, task, config, cache):
        self.X = X
        self.y = y
        self.w = weights
        self.task = task
        self.config = config
        self.cache = cache
        self.alpha = np.zeros(X.shape[0])
        self.exp_clamped = False

    def objective(self) -> float:
        f = self.cache.P @ self.alpha
        if self.task is Task.CLASSIFICATION and margin_exponent(self.y, f)[1]:
            self.exp_clamped = True
        return objective(self.alpha, self.cache, self.y, self.w, self.task, self.config)

    def alpha_step(self) -> None:
        cfg = self.config
        if self.task is Task.REGRESSION:
            new = alpha_step_regression(self.cache, self.y, cfg.gamma1, cfg.jitter)
        else:
            new = alpha_step_classification(self.cache, self.y, self.w, self.alpha,
                                            cfg.gamma1, cfg.newton_backtracks, cfg.jitter)
        P = self.cache.P
        before = _alpha_objective(self.task, self.w, self.y, self.alpha, P @ self.alpha, cfg.gamma1)
        after = _alpha_objective(self.task, self.w, self.y, new, P @ new, cfg.gamma1)
        # ties are common at lam = 0, where the update leaves f unchanged
        if after <= before + 1e-13 * (1.0 + abs(before)):
            self.alpha = new

    def sweep(self) -> None:
        cfg = self.config
        cache = self.cache
        for q in range(cache.lam.shape[0]):
            prof = coordinate_profile(cache, q, self.alpha)
            new = lambda_coordinate_step(prof, self.y, self.w, self.task, cfg.gamma1,
                                         cfg.gamma2, cfg.bound, current=cache.lam[q],
                                         tol=cfg.coord_tol)
            cache.set_lambda(q, new)
        cache.rebuild()

    def gradient_ratio(self) -> float:
        P = self.cache.P
        f = P @ self.alpha
        g, _ = loss_derivatives(self.task, self.w, self.y, f)
        n = len(self.y)
        grad = P @ (g / n + 2.0 * self.config.gamma1 * self.alpha)
        scale = np.linalg.norm(P) * (np.linalg.norm(g) / n
                                     + 2.0 * self.config.gamma1 * np.linalg.norm(self.alpha))
        return float(np.linalg.norm(grad) / scale) if scale > 0 else 0.0


def fit(
    data: Dataset,
    config: FitConfig = FitConfig(),
    sigma: Optional[float] = None,
    grams: Optional[np.ndarray] = None,
) -> FittedModel:
    """Fit kernel coefficients and per-feature kernel weights jointly.

    Parameters
    ----------
    data : Dataset
        Standardized features and outcome.
    config : FitConfig
        Tuning parameters and stopping rules.
    sigma : float, optional
        Kernel bandwidth; if omitted, the median pairwise distance of
        ``data.X`` under the rule named by ``config.bandwidth``.
    grams : ndarray, optional
        Precomputed ``feature_grams(data.X, data.X, sigma)`` to share across fits.

    Returns
    -------
    FittedModel
        ``trace`` holds the objective before the first iteration and after
        each outer iteration (plus a final entry when the coefficient polish
        changes anything); ``converged`` is False if ``max_outer`` was hit.
    """
    X = data.X
    n, p = X.shape
    if n < 2:
        raise DegenerateData("need at least two observations")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(data.y)):
        raise DegenerateData("non-finite values in data")
    task = data.task
    if sigma is None:
        sigma = median_bandwidth(X, per_feature=config.bandwidth == "per-feature")

    if task is Task.REGRESSION:
        y_center = float(np.mean(data.y))
        y = data.y - y_center
    else:
        y_center = 0.0
        y = data.y
    weights = observation_weights(task, data.y)

    lam0 = _initial_lambda(task, X, data.y, config.bound)
    spec0 = KernelSpec(lam0, sigma, config.bound)
    if grams is None and p * n * n * 8 <= GRAM_STACK_LIMIT:
        grams = feature_grams(X, X, sigma)
    cache = build_product_cache(X, spec0, grams)

    state = _Fitter(X, y, weights, task, config, cache)
    L = state.objective()
    trace = [L]
    converged = False
    it = 0
    for it in range(1, config.max_outer + 1):
        lam_prev = cache.lam.copy()
        state.alpha_step()
        state.sweep()
        L_new = state.objective()
        trace.append(L_new)
        d_obj = abs(L_new - L)
        d_lam = float(np.sum(np.abs(cache.lam - lam_prev)))
        L = L_new
        lam_scale = float(np.sum(cache.lam))
        if d_obj <= config.cut_obj * (1.0 + abs(L_new)) and d_lam <= config.cut_lambda * lam_scale:
            converged = True
            break

    if config.polish:
        before = state.alpha
        if task is Task.REGRESSION:
            state.alpha_step()
        else:
            for _ in range(25):
                if state.gradient_ratio() <= 1e-10:
                    break
                prev = state.alpha
                state.alpha_step()
                if state.alpha is prev:
                    break
        if state.alpha is not before:
            trace.append(state.objective())

    spec = KernelSpec(cache.lam.copy(), sigma, config.bound)
    return FittedModel(
        spec=spec,
        alpha=state.alpha,
        train_X=X,
        task=task,
        y_center=y_center,
        weights=weights,
        trace=trace,
        config=config,
        converged=converged,
        n_iter=it,
        exp_clamped=state.exp_clamped,
        feature_names=list(data.feature_names),
        mean=None if data.mean is None else np.array(data.mean),
        scale=None if data.scale is None else np.array(data.scale),
    )


def predict(model: FittedModel, X_new: np.ndarray) -> np.ndarray:
    """Regression values or real-valued classification scores at standardized ``X_new``.

    Labels are ``sign(score)`` with zero mapped to +1.
    """
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new[None, :]
    if X_new.shape[1] != model.train_X.shape[1]:
        raise DimensionMismatch(
            f"expected {model.train_X.shape[1]} features, got {X_new.shape[1]}"
        )
    return gram(X_new, model.train_X, model.spec) @ model.alpha + model.y_center
