import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import nnls

from linklogic.lasso import NumericError, fit_nonneg_lasso, lasso_objective, standardize


def problem(seed, n=60, p=5):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    beta = np.abs(rng.normal(size=p)) * (rng.random(p) < 0.6)
    y = X @ beta - 0.3 * X[:, 0] + rng.normal(scale=0.1, size=n) + 2.0
    return X, y


def test_constant_column_gets_zero():
    X, y = problem(0)
    X[:, 2] = 3.5
    fit = fit_nonneg_lasso(X, y, 0.1)
    assert fit.coef[2] == 0.0 and fit.constant_columns[2]
    assert fit.converged


def test_large_penalty_gives_all_zeros_and_mean_intercept():
    X, y = problem(1)
    fit = fit_nonneg_lasso(X, y, 1e6)
    assert np.all(fit.coef == 0.0)
    assert fit.intercept == pytest.approx(y.mean())


@pytest.mark.parametrize("seed", range(5))
def test_zero_penalty_matches_nnls(seed):
    X, y = problem(seed)
    Z, yc, *_ = standardize(X, y)
    want, _ = nnls(Z, yc)
    fit = fit_nonneg_lasso(X, y, 0.0, tol=1e-12)
    got_gamma = fit.coef * X.std(axis=0)
    np.testing.assert_allclose(got_gamma, want, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.0, 0.5, 5.0, 50.0]))
def test_nonnegative_and_kkt(seed, lam):
    X, y = problem(seed, n=40, p=6)
    fit = fit_nonneg_lasso(X, y, lam, tol=1e-12)
    assert np.all(fit.coef >= 0)
    Z, yc, _, scale, _, _ = standardize(X, y)
    gamma = fit.coef * scale
    grad = -2 * Z.T @ (yc - Z @ gamma) + lam  # subgradient of the objective for gamma > 0
    active = gamma > 0
    np.testing.assert_allclose(grad[active], 0.0, atol=1e-5 * (1 + lam))
    assert np.all(grad[~active] >= -1e-5 * (1 + lam))
    assert fit.objective == pytest.approx(lasso_objective(Z, yc, gamma, lam), rel=1e-9)


def test_history_is_non_increasing():
    X, y = problem(3, n=80, p=8)
    fit = fit_nonneg_lasso(X, y, 2.0, record_history=True)
    h = np.array(fit.history)
    assert np.all(np.diff(h) <= 1e-9 * (1 + np.abs(h[:-1])))


def test_bad_inputs():
    X, y = problem(0)
    with pytest.raises(ValueError):
        fit_nonneg_lasso(X, y[:-1], 0.1)
    with pytest.raises(ValueError):
        fit_nonneg_lasso(X, y, -1.0)
    X[0, 0] = np.nan
    with pytest.raises(NumericError):
        fit_nonneg_lasso(X, y, 0.1)


def test_predict_uses_original_scale():
    X, y = problem(4)
    fit = fit_nonneg_lasso(X * 100.0, y, 0.0, tol=1e-12)
    ref = fit_nonneg_lasso(X, y, 0.0, tol=1e-12)
    np.testing.assert_allclose(fit.predict(X * 100.0), ref.predict(X), atol=1e-8)
