import itertools
import math

import numpy as np
import pytest

from rkhsel.errors import (
    DegenerateData,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidBandwidth,
    KernelOverflow,
)
from rkhsel.kernel import (
    KernelSpec,
    build_product_cache,
    coordinate_profile,
    feature_grams,
    gauss1d,
    gram,
    median_bandwidth,
)


def brute_gram(X, Z, lam, sigma):
    K = np.ones((len(X), len(Z)))
    for i in range(len(X)):
        for j in range(len(Z)):
            for m in range(len(lam)):
                K[i, j] *= 1.0 + lam[m] * math.exp(-(X[i, m] - Z[j, m]) ** 2 / (2 * sigma ** 2))
    return K


def test_gauss1d_values():
    assert gauss1d(0.0, 0.0, 1.0) == 1.0
    assert math.isclose(gauss1d(0.0, 2.0, 1.0), 0.135335283, rel_tol=1e-8)
    assert math.isclose(gauss1d(1.0, 3.0, 2.0), 0.606530660, rel_tol=1e-8)


def test_gauss1d_bad_sigma():
    with pytest.raises(InvalidBandwidth):
        gauss1d(0.0, 1.0, 0.0)
    with pytest.raises(InvalidBandwidth):
        gauss1d(0.0, 1.0, -1.0)


def test_median_bandwidth_examples():
    assert median_bandwidth(np.array([[0.0], [1.0], [3.0]])) == 2.0
    assert median_bandwidth(np.array([[0.0, 0.0], [3.0, 4.0]])) == 5.0


def test_median_bandwidth_brute_force(rng):
    X = rng.standard_normal((10, 5))
    d = [np.linalg.norm(X[i] - X[j]) for i, j in itertools.combinations(range(10), 2)]
    assert len(d) == 45
    assert math.isclose(median_bandwidth(X), float(np.median(d)), rel_tol=1e-12)


def test_median_bandwidth_zero_median_fallback():
    X = np.array([[0.0], [0.0], [0.0], [2.0]])
    # distances {0,0,0,2,2,2}: median 1.0 is positive, so no fallback
    assert median_bandwidth(X) == 1.0
    X = np.array([[0.0], [0.0], [0.0], [0.0], [3.0]])
    # six zero distances out of ten: fall back to the smallest positive one
    assert median_bandwidth(X) == 3.0


def test_median_bandwidth_degenerate():
    with pytest.raises(DegenerateData):
        median_bandwidth(np.ones((4, 2)))
    with pytest.raises(DegenerateData):
        median_bandwidth(np.ones((1, 2)))


def test_median_bandwidth_per_feature():
    X = np.array([[0.0, 0.0], [1.0, 10.0], [3.0, 20.0]])
    # pooled |differences|: {1, 3, 2} and {10, 20, 10}; median of six is (3 + 10) / 2
    assert median_bandwidth(X, per_feature=True) == 6.5


def test_gram_zero_lambda_is_ones(rng):
    X = rng.standard_normal((5, 3))
    np.testing.assert_array_equal(gram(X, X, KernelSpec(np.zeros(3), 1.0)), np.ones((5, 5)))


def test_gram_diagonal_and_scalar():
    X = np.array([[0.0, 1.0], [2.0, -1.0]])
    K = gram(X, X, KernelSpec([1.0, 0.0], 1.0))
    np.testing.assert_array_equal(np.diag(K), [2.0, 2.0])
    assert gram(np.zeros((1, 1)), np.zeros((1, 1)), KernelSpec([2.0], 1.0))[0, 0] == 3.0


def test_gram_matches_brute_force(rng):
    X = rng.standard_normal((6, 3))
    Z = rng.standard_normal((4, 3))
    lam = np.array([0.5, 0.0, 3.0])
    np.testing.assert_allclose(gram(X, Z, KernelSpec(lam, 1.3)), brute_gram(X, Z, lam, 1.3),
                               rtol=1e-13)


def test_gram_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        gram(rng.standard_normal((3, 2)), rng.standard_normal((3, 3)), KernelSpec(np.ones(2), 1.0))


def test_gram_overflow():
    X = np.zeros((2, 70))
    with pytest.raises(KernelOverflow):
        gram(X, X, KernelSpec(np.full(70, 1e5), 1.0))


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec([-1.0], 1.0)
    with pytest.raises(ValueError):
        KernelSpec([2e5], 1.0)
    with pytest.raises(InvalidBandwidth):
        KernelSpec([1.0], 0.0)
    spec = KernelSpec([1.0, 2.0], 1.0)
    with pytest.raises(ValueError):
        spec.lam[0] = 5.0


def test_cache_zero_lambda(rng):
    X = rng.standard_normal((6, 3))
    cache = build_product_cache(X, KernelSpec(np.zeros(3), 1.0))
    np.testing.assert_array_equal(cache.P, np.ones((6, 6)))
    for m in range(3):
        G = cache.block(m)
        np.testing.assert_array_equal(G, G.T)
        np.testing.assert_array_equal(np.diag(G), np.ones(6))


def test_cache_matches_product_of_factors(rng):
    X = rng.standard_normal((8, 3))
    lam = rng.uniform(0, 5, 3)
    spec = KernelSpec(lam, 0.9)
    cache = build_product_cache(X, spec)
    expected = np.ones((8, 8))
    for m in range(3):
        expected *= 1.0 + lam[m] * gauss1d(X[:, m, None], X[None, :, m], 0.9)
    np.testing.assert_allclose(cache.P, expected, rtol=1e-13)
    np.testing.assert_allclose(cache.P, gram(X, X, spec), rtol=1e-13)
    assert np.all(cache.P >= 1.0)


def test_cache_with_precomputed_grams(rng):
    X = rng.standard_normal((7, 4))
    spec = KernelSpec(rng.uniform(0, 2, 4), 1.1)
    a = build_product_cache(X, spec)
    b = build_product_cache(X, spec, feature_grams(X, X, 1.1))
    np.testing.assert_allclose(a.P, b.P, rtol=1e-14)
    with pytest.raises(DimensionMismatch):
        build_product_cache(X, spec, feature_grams(X[:5], X[:5], 1.1))


def test_profile_zero_alpha(rng):
    X = rng.standard_normal((5, 2))
    cache = build_product_cache(X, KernelSpec([1.0, 2.0], 1.0))
    prof = coordinate_profile(cache, 1, np.zeros(5))
    np.testing.assert_array_equal(prof.a, 0.0)
    np.testing.assert_array_equal(prof.b, 0.0)
    assert prof.v == 0.0


def test_profile_single_point():
    cache = build_product_cache(np.zeros((1, 1)), KernelSpec([0.7], 1.0))
    prof = coordinate_profile(cache, 0, np.array([1.5]))
    assert math.isclose(prof.a[0], 1.5)
    assert math.isclose(prof.b[0], 1.5)
    assert math.isclose(prof.v, 2.25)


def test_profile_matches_scratch_gram(rng):
    X = rng.standard_normal((6, 3))
    lam = np.array([0.8, 2.5, 0.0])
    alpha = rng.standard_normal(6)
    for q in range(3):
        cache = build_product_cache(X, KernelSpec(lam, 1.2))
        prof = coordinate_profile(cache, q, alpha)
        for t in np.linspace(0.0, 10.0, 10):
            lt = lam.copy()
            lt[q] = t
            K = brute_gram(X, X, lt, 1.2)
            np.testing.assert_allclose(prof.a + prof.b * t, K @ alpha, rtol=1e-10, atol=1e-12)
            assert math.isclose(prof.const + prof.v * t, alpha @ K @ alpha, rel_tol=1e-10)


def test_profile_index_checks(rng):
    cache = build_product_cache(rng.standard_normal((4, 2)), KernelSpec([1.0, 1.0], 1.0))
    with pytest.raises(IndexOutOfRange):
        coordinate_profile(cache, 2, np.zeros(4))
    with pytest.raises(IndexOutOfRange):
        coordinate_profile(cache, -1, np.zeros(4))
    with pytest.raises(DimensionMismatch):
        coordinate_profile(cache, 0, np.zeros(3))


def test_set_lambda_affine_identity(rng):
    X = rng.standard_normal((9, 4))
    lam = np.array([0.0, 1.0, 4.0, 0.3])
    cache = build_product_cache(X, KernelSpec(lam, 1.0))
    for q, t in [(0, 2.0), (1, 0.0), (2, 1e5), (3, 0.3), (2, 7.0), (0, 0.0)]:
        cache.set_lambda(q, t)
        lam[q] = t
        fresh = build_product_cache(X, KernelSpec(lam, 1.0))
        np.testing.assert_allclose(cache.P, fresh.P, rtol=1e-9)
    cache.rebuild()
    np.testing.assert_allclose(cache.P, build_product_cache(X, KernelSpec(lam, 1.0)).P,
                               rtol=1e-14)


def test_set_lambda_overflow_leaves_cache_intact():
    X = np.zeros((3, 60))
    lam = np.full(60, 1e5)
    lam[0] = 0.0
    cache = build_product_cache(X, KernelSpec(lam, 1.0))
    before = cache.P.copy()
    with pytest.raises(KernelOverflow):
        cache.set_lambda(0, 1e5)
    np.testing.assert_array_equal(cache.P, before)
    assert cache.lam[0] == 0.0


def test_lazy_blocks_match_stack(rng):
    X = rng.standard_normal((6, 3))
    stack = feature_grams(X, X, 0.7)
    cache = build_product_cache(X, KernelSpec([1.0, 0.0, 2.0], 0.7))
    for m in range(3):
        np.testing.assert_allclose(cache.block(m), stack[m], rtol=1e-15)
