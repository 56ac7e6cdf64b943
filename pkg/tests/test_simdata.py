import math

import numpy as np
import pytest

from rkhsel.errors import InvalidDimension
from rkhsel.loss import Task
from rkhsel.numerics import correlation_matrix
from rkhsel.simdata import (
    STUDY2_PAIRS,
    generate,
    generate_study1,
    generate_study2,
    study1_mean,
    study2_index,
    study2_prob,
)


def test_study1_formula_examples():
    x = np.array([[1.0, 1.0, 1.0, 0.0, 1.0, 0.0]])
    assert math.isclose(study1_mean(x)[0], 0.9 + 4.0 + 2.3 * math.exp(-1.0), rel_tol=1e-15)
    assert math.isclose(study1_mean(x)[0], 5.746, abs_tol=5e-4)
    assert study1_mean(np.zeros((1, 5)))[0] == 2.3


def test_study2_probability_examples():
    assert math.isclose(study2_prob(np.zeros((1, 4)))[0], 1 / (1 + math.exp(-0.25)), rel_tol=1e-15)
    assert math.isclose(study2_prob(np.zeros((1, 4)))[0], 0.5622, abs_tol=1e-4)
    far = np.array([[0.0, 50.0, 0.0, 0.0]])
    assert study2_prob(far)[0] == 0.0


def test_dimensions_checked():
    with pytest.raises(InvalidDimension):
        generate_study1(10, 4)
    with pytest.raises(InvalidDimension):
        generate_study2(10, 3)
    with pytest.raises(ValueError):
        generate(3, 10, 10)


def test_shapes_and_supports():
    inst = generate_study1(30, 8, 40, np.random.default_rng(0))
    assert inst.train.X.shape == (30, 8) and inst.validation.X.shape == (40, 8)
    np.testing.assert_array_equal(inst.true_support, [0, 1, 2, 3, 4])
    assert inst.train.task is Task.REGRESSION
    inst = generate_study2(30, 8, 40, np.random.default_rng(0))
    np.testing.assert_array_equal(inst.true_support, [1, 2, 3])
    assert set(np.unique(inst.train.y)) <= {-1.0, 1.0}


@pytest.mark.parametrize("study", [1, 2])
def test_deterministic(study):
    a = generate(study, 25, 6, 30, np.random.default_rng(3))
    b = generate(study, 25, 6, 30, np.random.default_rng(3))
    for da, db in ((a.train, b.train), (a.validation, b.validation)):
        assert da.X.tobytes() == db.X.tobytes()
        assert da.y.tobytes() == db.y.tobytes()


def test_study1_noise_is_standard_normal():
    inst = generate_study1(20000, 6, 10, np.random.default_rng(11))
    eps = inst.train.y - study1_mean(inst.train.X)
    assert abs(eps.mean()) < 0.03 and abs(eps.var() - 1.0) < 0.05


def test_study1_correlation_sampling():
    X = generate_study1(20000, 6, 10, np.random.default_rng(12)).train.X
    assert abs(np.corrcoef(X[:, 0], X[:, 1])[0, 1] - 0.4) <= 0.03


@pytest.mark.parametrize("study", [1, 2])
def test_marginals(study):
    X = generate(study, 20000, 7, 10, np.random.default_rng(13)).train.X
    assert np.all(np.abs(X.mean(axis=0)) <= 0.03)
    assert np.all(np.abs(X.var(axis=0) - 1.0) <= 0.05)


def test_study2_matrix_positive_definite():
    np.linalg.cholesky(correlation_matrix(4, STUDY2_PAIRS))


def test_study2_conditional_frequency():
    # About 4% of draws have |c| < 0.05, so at n = 20000 the frequency has a
    # binomial sd near 0.018; the 0.02 band is checked at a larger n instead.
    inst = generate_study2(400000, 4, 10, np.random.default_rng(14))
    near = np.abs(study2_index(inst.train.X)) < 0.05
    assert abs(np.mean(inst.train.y[near] == 1.0) - 0.562) <= 0.02
    inst = generate_study2(20000, 4, 10, np.random.default_rng(14))
    near = np.abs(study2_index(inst.train.X)) < 0.05
    sd = math.sqrt(0.562 * 0.438 / near.sum())
    assert abs(np.mean(inst.train.y[near] == 1.0) - 0.562) <= 3 * sd
