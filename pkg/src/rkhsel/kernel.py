"""The lambda-weighted tensor-product Gaussian kernel.

The kernel between two points ``x`` and ``z`` is

    k(x, z) = prod_m (1 + lambda_m * exp(-(x_m - z_m)^2 / (2 sigma^2)))

so a feature with ``lambda_m = 0`` contributes a factor of exactly one and
drops out of the function space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from . import _fast
from .errors import (
    DegenerateData,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidBandwidth,
    KernelOverflow,
)

OVERFLOW_LIMIT = 1e300
_LOG_LIMIT = float(np.log(OVERFLOW_LIMIT))


@dataclass(frozen=True)
class KernelSpec:
    """Per-feature weights ``lam``, shared bandwidth ``sigma`` and box bound ``bound``."""

    lam: np.ndarray
    sigma: float
    bound: float = 1e5

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float, copy=True).reshape(-1)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidBandwidth(f"sigma must be finite and positive, got {self.sigma}")
        if not self.bound > 0:
            raise ValueError(f"bound must be positive, got {self.bound}")
        if np.any(lam < 0) or np.any(lam > self.bound) or not np.all(np.isfinite(lam)):
            raise ValueError("lambda entries must lie in [0, bound]")

    @property
    def p(self) -> int:
        return self.lam.shape[0]

    def with_lambda(self, lam) -> "KernelSpec":
        return KernelSpec(lam, self.sigma, self.bound)


def gauss1d(x, y, sigma: float):
    """Univariate Gaussian kernel ``exp(-(x - y)^2 / (2 sigma^2))``."""
    if not sigma > 0:
        raise InvalidBandwidth(f"sigma must be positive, got {sigma}")
    d = np.subtract(x, y)
    return np.exp(-(d * d) / (2.0 * sigma * sigma))


def median_bandwidth(X: np.ndarray, per_feature: bool = False) -> float:
    """Median pairwise distance between rows of ``X``.

    By default distances are Euclidean over full feature vectors. With
    ``per_feature=True`` the median is taken over the pooled per-coordinate
    absolute differences instead. A zero median falls back to the smallest
    nonzero distance.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DegenerateData("need at least two rows to compute pairwise distances")
    if not np.all(np.isfinite(X)):
        raise DegenerateData("non-finite entries in feature matrix")
    if per_feature:
        dist = np.concatenate([pdist(X[:, [m]]) for m in range(X.shape[1])])
    else:
        dist = pdist(X)
    positive = dist[dist > 0]
    if positive.size == 0:
        raise DegenerateData("all rows are identical")
    med = float(np.median(dist))
    if med > 0:
        return med
    return float(positive.min())


def feature_grams(X: np.ndarray, Z: np.ndarray, sigma: float) -> np.ndarray:
    """Stack of per-feature Gaussian Gram blocks, shape ``(p, n, m)``."""
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if X.shape[1] != Z.shape[1]:
        raise DimensionMismatch(f"column counts differ: {X.shape[1]} vs {Z.shape[1]}")
    if not sigma > 0:
        raise InvalidBandwidth(f"sigma must be positive, got {sigma}")
    D = np.empty((X.shape[1], X.shape[0], Z.shape[0]))
    for m in range(X.shape[1]):
        np.subtract.outer(X[:, m], Z[:, m], out=D[m])
    D *= D
    D *= -1.0 / (2.0 * sigma * sigma)
    np.exp(D, out=D)
    return D


def check_lambda_overflow(lam: np.ndarray) -> None:
    """Raise if ``prod(1 + lam)``, the largest possible Gram entry, exceeds the guard."""
    if float(np.sum(np.log1p(lam))) > _LOG_LIMIT:
        raise KernelOverflow(f"Gram entries can exceed {OVERFLOW_LIMIT:g}")


def gram(X: np.ndarray, Z: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix between the rows of ``X`` and ``Z`` under ``spec``."""
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if X.ndim != 2 or Z.ndim != 2 or X.shape[1] != Z.shape[1] or X.shape[1] != spec.p:
        raise DimensionMismatch(
            f"feature counts disagree: X {X.shape}, Z {Z.shape}, lambda length {spec.p}"
        )
    check_lambda_overflow(spec.lam)
    K = np.ones((X.shape[0], Z.shape[0]))
    scale = -1.0 / (2.0 * spec.sigma ** 2)
    for m in np.flatnonzero(spec.lam):
        d = X[:, m, None] - Z[None, :, m]
        K *= 1.0 + spec.lam[m] * np.exp(scale * d * d)
    return K


@dataclass
class CoordinateProfile:
    """Affine dependence of the fit on one kernel weight.

    Training predictions are ``a + b * lam_q`` and the quadratic form
    ``alpha' K alpha`` equals ``const + v * lam_q``.
    """

    a: np.ndarray
    b: np.ndarray
    v: float
    const: float


@dataclass
class ProductCache:
    """Training Gram matrix ``P`` together with the per-feature blocks.

    ``grams`` holds the ``(p, n, n)`` stack of univariate Gaussian blocks.
    It is shared read-only across fits on the same training rows; ``P`` is
    private to the owner and updated in place by :meth:`set_lambda`.
    """

    P: np.ndarray
    grams: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None
    X: Optional[np.ndarray] = None
    sigma: Optional[float] = None
    _fresh: dict = field(default_factory=dict, repr=False)
    _C: Optional[np.ndarray] = field(default=None, repr=False)
    _cq: int = field(default=-1, repr=False)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def block(self, m: int) -> np.ndarray:
        if self.grams is not None:
            return self.grams[m]
        if m in self._fresh:
            return self._fresh[m]
        col = self.X[:, m]
        G = gauss1d(col[:, None], col[None, :], self.sigma)
        self._fresh.clear()
        self._fresh[m] = G
        return G

    def factor_out(self, q: int) -> np.ndarray:
        """``P`` with the factor of feature ``q`` divided out.

        The result does not depend on ``lam[q]``, so it stays valid across
        updates of that one weight. Callers must not modify it.
        """
        if self.lam[q] == 0.0:
            return self.P
        if self._cq != q:
            _fast.divide_out(self.P, self.block(q), float(self.lam[q]), self._buffer())
            self._cq = q
        return self._C

    def profile_ab(self, q: int, alpha: np.ndarray):
        """``(C alpha, (C * G_q) alpha)`` with ``C = factor_out(q)``."""
        G = self.block(q)
        if self.lam[q] == 0.0:
            return _fast.profile_ab(self.P, G, alpha)
        if self._cq == q:
            return _fast.profile_ab(self._C, G, alpha)
        out = _fast.profile_divide(self.P, G, float(self.lam[q]), alpha, self._buffer())
        self._cq = q
        return out

    def _buffer(self) -> np.ndarray:
        if self._C is None:
            self._C = np.empty_like(self.P)
        return self._C

    def set_lambda(self, q: int, new: float) -> None:
        """Replace the factor of feature ``q`` in place with weight ``new``."""
        if new == self.lam[q]:
            return
        trial = self.lam.copy()
        trial[q] = new
        check_lambda_overflow(trial)
        C = self.factor_out(q)
        if C is self.P:
            C = self._buffer()
            C[...] = self.P
        _fast.multiply_in(C, self.block(q), float(new), self.P)
        self.lam[q] = new
        self._cq = q

    def rebuild(self) -> None:
        """Recompute ``P`` from scratch to discard accumulated round-off."""
        check_lambda_overflow(self.lam)
        P = np.ones_like(self.P)
        for m in np.flatnonzero(self.lam):
            _fast.multiply_in(P, self.block(m), float(self.lam[m]), P)
        self.P = P
        self._cq = -1


def build_product_cache(
    X: np.ndarray, spec: KernelSpec, grams: Optional[np.ndarray] = None
) -> ProductCache:
    """Build the training Gram cache for ``X`` under ``spec``.

    Pass a precomputed ``grams`` stack (from :func:`feature_grams`) to skip
    recomputing the per-feature blocks; otherwise they are materialized
    lazily one feature at a time.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.p:
        raise DimensionMismatch(f"X has {X.shape[-1]} columns, lambda has length {spec.p}")
    if grams is not None and grams.shape != (spec.p, X.shape[0], X.shape[0]):
        raise DimensionMismatch(f"gram stack has shape {grams.shape}")
    cache = ProductCache(
        P=np.ones((X.shape[0], X.shape[0])),
        grams=grams,
        lam=np.array(spec.lam, dtype=float),
        X=X,
        sigma=spec.sigma,
    )
    cache.rebuild()
    return cache


def coordinate_profile(
    cache: ProductCache, q: int, alpha: np.ndarray, spec: Optional[KernelSpec] = None
) -> CoordinateProfile:
    """Decompose predictions and RKHS norm as affine functions of ``lam[q]``.

    ``spec``, when given, must carry the weights the cache was built with.
    """
    lam = cache.lam
    if spec is not None and not np.array_equal(spec.lam, lam):
        raise ValueError("spec weights do not match the cache")
    if not 0 <= q < len(lam):
        raise IndexOutOfRange(f"feature index {q} out of range for p={len(lam)}")
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (cache.n,):
        raise DimensionMismatch(f"alpha has shape {alpha.shape}, expected ({cache.n},)")
    a, b = cache.profile_ab(q, alpha)
    return CoordinateProfile(a=a, b=b, v=float(alpha @ b), const=float(alpha @ a))
