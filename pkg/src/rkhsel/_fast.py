"""Compiled inner loops for the kernel-weight sweep.

Matrices are square, C-contiguous float64. ``fastmath`` lets the row
reductions vectorize; results are deterministic for a given build.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def profile_ab(C, G, alpha):
    """``a = C alpha`` and ``b = (C * G) alpha``."""
    n = C.shape[0]
    a = np.empty(n)
    b = np.empty(n)
    for j in range(n):
        sa = 0.0
        sb = 0.0
        for i in range(n):
            c = C[j, i] * alpha[i]
            sa += c
            sb += c * G[j, i]
        a[j] = sa
        b[j] = sb
    return a, b


@njit(cache=True, fastmath=True)
def profile_divide(P, G, lam, alpha, C):
    """Fill ``C = P / (1 + lam G)`` and return ``(C alpha, (C * G) alpha)``."""
    n = P.shape[0]
    a = np.empty(n)
    b = np.empty(n)
    for j in range(n):
        sa = 0.0
        sb = 0.0
        for i in range(n):
            g = G[j, i]
            c = P[j, i] / (1.0 + lam * g)
            C[j, i] = c
            c *= alpha[i]
            sa += c
            sb += c * g
        a[j] = sa
        b[j] = sb
    return a, b


@njit(cache=True, fastmath=True)
def divide_out(P, G, lam, C):
    """Fill ``C = P / (1 + lam G)``."""
    p = P.ravel()
    g = G.ravel()
    c = C.ravel()
    for k in range(p.shape[0]):
        c[k] = p[k] / (1.0 + lam * g[k])


@njit(cache=True, fastmath=True)
def multiply_in(C, G, lam, P):
    """Fill ``P = C * (1 + lam G)``; ``C`` and ``P`` may be the same array."""
    c = C.ravel()
    g = G.ravel()
    p = P.ravel()
    for k in range(p.shape[0]):
        p[k] = c[k] * (1.0 + lam * g[k])
