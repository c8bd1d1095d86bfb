"""Polynomial regression against exact cases and a gradient-descent oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskgrid.learn.linreg import (
    expand_matrix,
    fit_linreg,
    monomial_exponents,
    polynomial_features,
)
from riskgrid.seeding import rng_for


# ---------------------------------------------------------------- expansion

def test_two_vars_degree_two_layout():
    a, b = 3.0, 5.0
    np.testing.assert_array_equal(
        polynomial_features(np.array([a, b]), 2),
        [a, b, a * a, a * b, b * b],
    )


def test_degree_one_is_identity():
    x = np.array([2.0, -1.0, 7.5])
    np.testing.assert_array_equal(polynomial_features(x, 1), x)


def test_d3_degree3_count():
    assert len(polynomial_features(np.zeros(3), 3)) == math.comb(6, 3) - 1


@given(st.integers(1, 8), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_expansion_length_formula(d, degree):
    x = np.linspace(0.5, 1.5, d)
    expect = math.comb(d + degree, degree) - 1
    assert len(polynomial_features(x, degree)) == expect
    assert len(monomial_exponents(d, degree)) == expect


def test_exponent_order_is_graded_lexicographic():
    exps = monomial_exponents(2, 3)
    assert exps == [
        (1, 0), (0, 1),
        (2, 0), (1, 1), (0, 2),
        (3, 0), (2, 1), (1, 2), (0, 3),
    ]


def test_expansion_values_match_exponents():
    rng = rng_for(0x11, 0)
    x = rng.normal(size=4)
    feats = polynomial_features(x, 3)
    for val, e in zip(feats, monomial_exponents(4, 3)):
        expect = None
        for v, k in enumerate(e):
            for _ in range(k):
                expect = x[v] if expect is None else expect * x[v]
        # Products associate differently between the two computations, so
        # agreement is to rounding, not bitwise.
        assert val == pytest.approx(expect, rel=1e-14)


def test_degree_zero_rejected():
    with pytest.raises(ValueError):
        polynomial_features(np.array([1.0]), 0)


# ---------------------------------------------------------------- fitting

def test_exact_line():
    x = np.linspace(-3, 3, 20)[:, None]
    y = 2.0 * x[:, 0] + 1.0
    m = fit_linreg(x, y, degree=1)
    coefs, intercept = m.raw_coefficients()
    assert abs(coefs[(1,)] - 2.0) < 1e-8
    assert abs(intercept - 1.0) < 1e-8
    assert np.max(np.abs(m.predict(x) - y)) < 1e-8


def test_constant_target():
    rng = rng_for(0x12, 0)
    X = rng.normal(size=(30, 3))
    m = fit_linreg(X, np.full(30, 4.25), degree=2)
    assert np.max(np.abs(m.coefficients)) < 1e-10
    assert abs(m.intercept - 4.25) < 1e-10


def test_noiseless_polynomial_recovery():
    # Max |residual| < 1e-6 on data generated exactly by a degree-2 model.
    rng = rng_for(0x13, 0)
    X = rng.uniform(-2, 2, size=(100, 3))
    feats = expand_matrix(X, 2)
    true_w = rng.normal(size=feats.shape[1])
    y = feats @ true_w + 0.7
    m = fit_linreg(X, y, degree=2)
    assert np.max(np.abs(m.predict(X) - y)) < 1e-6


def test_raw_coefficients_reproduce_predictions():
    rng = rng_for(0x14, 0)
    X = rng.normal(size=(50, 2))
    y = rng.normal(size=50)
    m = fit_linreg(X, y, degree=3)
    coefs, intercept = m.raw_coefficients()
    exps = monomial_exponents(2, 3)
    manual = intercept + expand_matrix(X, 3) @ np.array([coefs[e] for e in exps])
    np.testing.assert_allclose(m.predict(X), manual, rtol=0, atol=1e-8)


def gd_fit(Z, y, iters=200_000, lr=None):
    """Plain batch gradient descent on standardized features; independent
    of the lstsq path."""
    n, p = Z.shape
    A = np.concatenate([np.ones((n, 1)), Z], axis=1)
    if lr is None:
        # 1/L for the quadratic objective, L = largest eigenvalue of A^T A / n.
        lr = 0.9 / float(np.linalg.eigvalsh(A.T @ A / n).max())
    beta = np.zeros(p + 1)
    for _ in range(iters):
        grad = A.T @ (A @ beta - y) / n
        beta -= lr * grad
    return beta


def test_matches_gradient_descent_oracle():
    rng = rng_for(0x15, 1)
    X = rng.uniform(-1, 1, size=(80, 2))
    y = 1.5 * X[:, 0] - 0.5 * X[:, 1] ** 2 + rng.normal(scale=0.1, size=80)
    m = fit_linreg(X, y, degree=2)
    Z = (expand_matrix(X, 2) - m.col_mean) / m.col_scale
    beta = gd_fit(Z, y)
    assert abs(m.intercept - beta[0]) < 1e-4
    np.testing.assert_allclose(m.coefficients, beta[1:], rtol=0, atol=1e-4)
    np.testing.assert_allclose(m.predict(X), Z @ beta[1:] + beta[0], rtol=0, atol=1e-4)


def test_underdetermined_warns_and_fits():
    X = rng_for(0x16, 0).normal(size=(4, 3))
    y = np.arange(4.0)
    with pytest.warns(UserWarning, match="underdetermined"):
        m = fit_linreg(X, y, degree=2)
    # Minimum-norm fit still interpolates.
    assert np.max(np.abs(m.predict(X) - y)) < 1e-8


def test_non_finite_target_rejected():
    X = np.ones((3, 1))
    with pytest.raises(ValueError):
        fit_linreg(X, np.array([1.0, np.nan, 2.0]), degree=1)


def test_constant_column_survives_standardization():
    X = np.column_stack([np.ones(20), np.linspace(0, 1, 20)])
    y = 3.0 * X[:, 1] + 2.0
    m = fit_linreg(X, y, degree=1)
    assert np.max(np.abs(m.predict(X) - y)) < 1e-8
