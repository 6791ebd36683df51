import math

import numpy as np
import pytest

from compressed_pd.objectives import (
    LogisticNonconvex,
    PLScalar,
    Quadratic,
    finite_difference_gradient,
    softplus,
)


@pytest.fixture
def logistic():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((4, 30, 6))
    Y = (rng.random((4, 30)) < 0.5).astype(float)
    return LogisticNonconvex(list(Z), list(Y), lam=0.1, mu=2.0)


def test_logistic_value_at_zero(logistic):
    n, m = logistic.n_agents, logistic.m
    for i in range(n):
        assert logistic.value(i, np.zeros(6)) == pytest.approx(n * 30 / m * math.log(2))
    f, g = logistic.global_value_and_gradient(np.zeros(6))
    assert f == pytest.approx(math.log(2))


def test_penalty_gradient_vanishes_at_zero(logistic):
    np.testing.assert_array_equal(logistic._penalty_grad(np.zeros(6)), 0)


def test_batched_gradients_match_per_agent(logistic):
    X = np.random.default_rng(1).standard_normal((4, 6))
    G = logistic.gradients(X)
    for i in range(4):
        np.testing.assert_allclose(G[i], logistic.gradient(i, X[i]), rtol=1e-13, atol=1e-15)


def test_global_is_average_of_agents(logistic):
    x = np.random.default_rng(2).standard_normal(6)
    f, g = logistic.global_value_and_gradient(x)
    assert f == pytest.approx(np.mean([logistic.value(i, x) for i in range(4)]))
    np.testing.assert_allclose(g, np.mean([logistic.gradient(i, x) for i in range(4)], axis=0))


def test_unequal_sample_counts():
    rng = np.random.default_rng(3)
    obj = LogisticNonconvex(
        [rng.standard_normal((5, 3)), rng.standard_normal((8, 3))],
        [np.ones(5), np.zeros(8)],
    )
    X = rng.standard_normal((2, 3))
    np.testing.assert_allclose(obj.gradients(X)[1], obj.gradient(1, X[1]))


def test_softplus_is_stable():
    assert softplus(np.array([1000.0]))[0] == 1000.0
    assert softplus(np.array([-1000.0]))[0] == 0.0
    assert softplus(np.array([0.0]))[0] == pytest.approx(math.log(2))


@pytest.mark.parametrize("lam, mu", [(-1, 1), (1, -1)])
def test_logistic_rejects_bad_penalty(lam, mu):
    with pytest.raises(ValueError):
        LogisticNonconvex([np.zeros((2, 2))], [np.zeros(2)], lam=lam, mu=mu)


def test_logistic_rejects_bad_labels():
    with pytest.raises(ValueError, match="labels"):
        LogisticNonconvex([np.zeros((2, 2))], [np.array([0.0, 2.0])])


def test_non_finite_point_rejected(logistic):
    with pytest.raises(ValueError):
        logistic.gradient(0, np.full(6, np.nan))


def test_pl_scalar():
    obj = PLScalar(dim=1)
    assert obj.value(0, [0.0]) == 0
    assert obj.gradient(0, [math.pi / 2])[0] == pytest.approx(math.pi)
    assert obj.pl_residual(np.zeros(1)) == 0
    pts = np.random.default_rng(0).uniform(-10, 10, 10_000)
    f = pts**2 + 3 * np.sin(pts) ** 2
    g = 2 * pts + 3 * np.sin(2 * pts)
    assert np.all(0.5 * g**2 - f / 32 >= 0)


def test_quadratic():
    q = Quadratic(np.eye(2))
    assert q.value(0, [1.0, 1.0]) == 1.0
    assert q.nu == 1.0 and q.f_star == 0.0
    for x in np.random.default_rng(0).standard_normal((20, 2)):
        assert q.pl_residual(x) == pytest.approx(0, abs=1e-12)


def test_quadratic_minimizer():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((3, 3, 3))
    Q = A @ A.transpose(0, 2, 1) + np.eye(3)
    b = rng.standard_normal((3, 3))
    obj = Quadratic(Q, b)
    _, g = obj.global_value_and_gradient(obj.x_star)
    np.testing.assert_allclose(g, 0, atol=1e-12)


def test_finite_difference_oracle():
    g = finite_difference_gradient(lambda x: np.sum(x**3), np.array([1.0, 2.0]))
    np.testing.assert_allclose(g, [3, 12], rtol=1e-8)
