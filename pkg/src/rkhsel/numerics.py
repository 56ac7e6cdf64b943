"""Dense linear algebra and scalar minimization helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, InvalidInterval, NonPSD, NotPositiveDefinite

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class JitterPolicy:
    """Diagonal jitter schedule used when a Cholesky factorization fails.

    ``initial_jitter`` and ``max_jitter`` are relative to the mean of the
    diagonal of the matrix being factorized.
    """

    initial_jitter: float = 1e-10
    growth_factor: float = 10.0
    max_jitter: float = 1e-4

    def __post_init__(self):
        if self.initial_jitter < 0 or self.growth_factor <= 1:
            raise ValueError("initial_jitter must be >= 0 and growth_factor > 1")
        if self.initial_jitter > self.max_jitter:
            raise ValueError("initial_jitter must not exceed max_jitter")


DEFAULT_JITTER = JitterPolicy()


def solve_spd(A: np.ndarray, b: np.ndarray, policy: JitterPolicy = DEFAULT_JITTER) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive (semi)definite ``A``.

    Tries a plain Cholesky factorization first; on failure adds
    ``jitter * I`` and escalates the jitter geometrically until the
    factorization succeeds or the policy's maximum is exceeded.

    Raises
    ------
    DimensionMismatch
        If ``A`` is not square, not symmetric, or ``b`` has the wrong length.
    NonPSD
        If factorization fails at the maximum jitter.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"rhs has length {b.shape[0]}, matrix has {A.shape[0]} rows")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale > 0 and np.max(np.abs(A - A.T)) > 1e-10 * scale:
        raise DimensionMismatch("matrix is not symmetric")

    try:
        return linalg.cho_solve(linalg.cho_factor(A, lower=True, check_finite=False), b,
                                check_finite=False)
    except linalg.LinAlgError:
        pass

    diag_mean = float(np.mean(np.diag(A)))
    if not diag_mean > 0:
        diag_mean = 1.0
    jitter = policy.initial_jitter * diag_mean
    max_jitter = policy.max_jitter * diag_mean
    if jitter == 0:
        jitter = np.finfo(float).eps * diag_mean
    eye = np.eye(A.shape[0])
    while jitter <= max_jitter * (1 + 1e-12):
        try:
            factor = linalg.cho_factor(A + jitter * eye, lower=True, check_finite=False)
            return linalg.cho_solve(factor, b, check_finite=False)
        except linalg.LinAlgError:
            jitter *= policy.growth_factor
    raise NonPSD(f"Cholesky failed with jitter up to {max_jitter:.3g}")


def minimize_convex_1d(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
    grad: Optional[Callable[[float], float]] = None,
) -> float:
    """Minimize a convex scalar function on ``[lo, hi]``.

    With ``grad`` given, bisects on the sign of the derivative; otherwise
    falls back to golden-section search. The returned point is compared
    against both endpoints, so boundary minima come back exactly.
    """
    if not lo < hi:
        raise InvalidInterval(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise InvalidInterval(f"tol must be positive, got {tol}")

    if grad is not None:
        if grad(lo) >= 0:
            return lo
        if grad(hi) <= 0:
            return hi
        a, b = lo, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            d = grad(mid)
            if d > 0:
                b = mid
            elif d < 0:
                a = mid
            else:
                a = b = mid
                break
        candidate = 0.5 * (a + b)
    else:
        a, b = lo, hi
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        gc, gd = g(c), g(d)
        while b - a > tol:
            if gc <= gd:
                b, d, gd = d, c, gc
                c = b - _INV_PHI * (b - a)
                gc = g(c)
            else:
                a, c, gc = c, d, gd
                d = a + _INV_PHI * (b - a)
                gd = g(d)
        candidate = 0.5 * (a + b)

    best, best_val = candidate, g(candidate)
    for end in (lo, hi):
        val = g(end)
        if val < best_val or (val == best_val and end < best):
            best, best_val = end, val
    return best


def correlation_matrix(p: int, corr_pairs: Sequence[Tuple[int, int, float]]) -> np.ndarray:
    """Unit-diagonal ``p x p`` matrix with the listed off-diagonal entries (0-based)."""
    R = np.eye(p)
    for i, j, rho in corr_pairs:
        if not (0 <= i < p and 0 <= j < p) or i == j:
            raise DimensionMismatch(f"invalid correlation pair ({i}, {j}) for p={p}")
        if not abs(rho) < 1:
            raise NotPositiveDefinite(f"|rho| must be < 1, got {rho}")
        R[i, j] = R[j, i] = rho
    return R


def sample_correlated_gaussian(
    n: int,
    p: int,
    corr_pairs: Sequence[Tuple[int, int, float]],
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw ``n`` rows from a zero-mean, unit-variance Gaussian with given correlations.

    Pairs use 0-based feature indices; unlisted pairs are uncorrelated.
    """
    R = correlation_matrix(p, corr_pairs)
    try:
        L = np.linalg.cholesky(R)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("correlation matrix is not positive definite") from exc
    Z = rng.standard_normal((n, p))
    if not corr_pairs:
        return Z
    return Z @ L.T
