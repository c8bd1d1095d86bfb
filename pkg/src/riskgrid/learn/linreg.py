"""Least-squares regression on polynomial-expanded, standardized features."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np


def monomial_exponents(d: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent vectors for all monomials of total degree 1..degree over d
    variables, graded-lexicographic. The constant term is excluded; the
    count is C(d + degree, degree) - 1.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1: {degree}")
    out: list[tuple[int, ...]] = []
    for total in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), total):
            e = [0] * d
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return out


def expand_matrix(X: np.ndarray, degree: int) -> np.ndarray:
    """Polynomial expansion of each row of X, columns per monomial_exponents."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    d = X.shape[1]
    exps = monomial_exponents(d, degree)
    powers = [[None] * (degree + 1) for _ in range(d)]
    for v in range(d):
        powers[v][1] = X[:, v]
        for k in range(2, degree + 1):
            powers[v][k] = powers[v][k - 1] * X[:, v]
    cols = []
    for e in exps:
        col = None
        for v in range(d):
            if e[v] == 0:
                continue
            col = powers[v][e[v]] if col is None else col * powers[v][e[v]]
        cols.append(col)
    return np.column_stack(cols)


def polynomial_features(x: np.ndarray, degree: int) -> np.ndarray:
    """Expanded vector of all monomials of total degree 1..degree of x."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be 1-D")
    return expand_matrix(x[None, :], degree)[0]


@dataclass
class LinearModel:
    """Fitted polynomial regression; coefficients live in standardized
    space, with the column means/scales kept so raw-space coefficients
    can be recovered exactly."""

    degree: int
    n_features: int
    coefficients: np.ndarray
    intercept: float
    col_mean: np.ndarray
    col_scale: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        Z = (expand_matrix(X, self.degree) - self.col_mean) / self.col_scale
        out = Z @ self.coefficients + self.intercept
        return float(out[0]) if single else out

    def raw_coefficients(self) -> tuple[dict[tuple[int, ...], float], float]:
        """(coefficient per monomial exponent vector, intercept) in the
        original unstandardized feature space."""
        exps = monomial_exponents(self.n_features, self.degree)
        raw = self.coefficients / self.col_scale
        intercept = self.intercept - float(np.sum(self.coefficients * self.col_mean / self.col_scale))
        return {e: float(c) for e, c in zip(exps, raw)}, intercept


def fit_linreg(X: np.ndarray, y: np.ndarray, degree: int = 2) -> LinearModel:
    """Least squares on the polynomial expansion, per-column standardized,
    solved by SVD (minimum-norm under rank deficiency). Underdetermined
    systems fit but emit a warning."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per target value")
    if not np.isfinite(y).all():
        raise ValueError("y contains non-finite values")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    Xp = expand_matrix(X, degree)
    n, p = Xp.shape
    mu = Xp.mean(axis=0)
    scale = Xp.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    Z = (Xp - mu) / scale
    if n < p + 1:
        warnings.warn(
            f"underdetermined regression: {n} rows for {p + 1} unknowns; using the minimum-norm fit",
            stacklevel=2,
        )
    A = np.concatenate([np.ones((n, 1)), Z], axis=1)
    beta, *_ = np.linalg.lstsq(A, y, rcond=None)
    return LinearModel(
        degree=degree,
        n_features=X.shape[1],
        coefficients=beta[1:],
        intercept=float(beta[0]),
        col_mean=mu,
        col_scale=scale,
    )
