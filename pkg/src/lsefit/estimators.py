"""Scikit-learn compatible wrappers around the fitting routines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .data import CONVEX, LOGLOG, Dataset
from .fitting import FitConfig, fit_gpos, fit_lse, fit_max_affine
from .models import gpos_value, lse_value, max_affine_value
from .validation import as_float_matrix, as_float_vector


def _check_fitted(estimator):
    if getattr(estimator, "model_", None) is None:
        raise NotFittedError(
            f"this {type(estimator).__name__} instance is not fitted yet; "
            "call fit before predict"
        )


class LseRegressor(RegressorMixin, BaseEstimator):
    """Convex regression with a smooth log-sum-exp model.

    Parameters
    ----------
    n_terms : int
        Number of exponential terms (model capacity).
    temperature : float
        Smoothing parameter; smaller values allow sharper fits.
    restarts : int
        Number of independent initializations; the best final loss wins.
    max_iter : int
        Iteration cap per restart.
    ridge : float
        Squared penalty weight on the exponent entries.
    tol : float
        Gradient sup-norm at which training stops.
    warm_start_partition : bool
        Seed the first restart from a max-affine partition fit.
    random_state : int
        Seed for all randomness in the fit.

    After fitting, ``model_`` holds the immutable model and ``report_`` the
    training report.
    """

    def __init__(
        self,
        n_terms: int = 3,
        temperature: float = 1.0,
        restarts: int = 5,
        max_iter: int = 2000,
        ridge: float = 0.0,
        tol: float = 1e-8,
        warm_start_partition: bool = True,
        random_state: int = 0,
    ):
        self.n_terms = n_terms
        self.temperature = temperature
        self.restarts = restarts
        self.max_iter = max_iter
        self.ridge = ridge
        self.tol = tol
        self.warm_start_partition = warm_start_partition
        self.random_state = random_state

    def _config(self) -> FitConfig:
        return FitConfig(
            n_terms=self.n_terms,
            temperature=self.temperature,
            restarts=self.restarts,
            max_iter=self.max_iter,
            ridge=self.ridge,
            tol=self.tol,
            warm_start=self.warm_start_partition,
            seed=self.random_state,
        )

    def fit(self, X, y):
        X = as_float_matrix(X, "X")
        y = as_float_vector(y, "y")
        data = Dataset(X, y, CONVEX)
        self.model_, self.report_ = fit_lse(data, self._config())
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        _check_fitted(self)
        return np.atleast_1d(lse_value(self.model_, as_float_matrix(X, "X")))


class GposRegressor(LseRegressor):
    """Log-log-convex regression with a generalized posynomial model.

    Accepts strictly positive inputs and targets; parameters are the same as
    for :class:`LseRegressor`, applied to the log-transformed data.
    """

    def fit(self, X, y):
        X = as_float_matrix(X, "X")
        y = as_float_vector(y, "y")
        data = Dataset(X, y, LOGLOG)
        self.model_, self.report_ = fit_gpos(data, self._config())
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        _check_fitted(self)
        return np.atleast_1d(gpos_value(self.model_, as_float_matrix(X, "X")))


class MaxAffineRegressor(RegressorMixin, BaseEstimator):
    """Convex regression with a piecewise-linear max-affine model."""

    def __init__(
        self,
        n_terms: int = 3,
        restarts: int = 5,
        max_iter: int = 200,
        random_state: int = 0,
    ):
        self.n_terms = n_terms
        self.restarts = restarts
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y):
        X = as_float_matrix(X, "X")
        y = as_float_vector(y, "y")
        data = Dataset(X, y, CONVEX)
        self.model_, self.report_ = fit_max_affine(
            data,
            n_terms=self.n_terms,
            seed=self.random_state,
            restarts=self.restarts,
            max_iter=self.max_iter,
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        _check_fitted(self)
        return np.atleast_1d(max_affine_value(self.model_, as_float_matrix(X, "X")))
