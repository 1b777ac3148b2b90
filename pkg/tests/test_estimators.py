import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lsefit import (
    GeneratorSpec,
    GposModel,
    GposRegressor,
    LseModel,
    LseRegressor,
    MaxAffineModel,
    MaxAffineRegressor,
    generate_dataset,
)


def _convex_data(seed=0, m=150):
    data = generate_dataset(GeneratorSpec(family="lse", dim=2, n_terms=3, seed=seed), m)
    return data.inputs, data.targets


def test_get_params_set_params_round_trip():
    est = LseRegressor(n_terms=4, temperature=0.2, random_state=3)
    params = est.get_params()
    assert params["n_terms"] == 4
    assert params["temperature"] == 0.2
    other = LseRegressor().set_params(**params)
    assert other.get_params() == params


def test_clone_preserves_behavior():
    X, y = _convex_data()
    est = LseRegressor(n_terms=3, temperature=1.0, restarts=2, max_iter=300, random_state=1)
    cloned = clone(est)
    preds_a = est.fit(X, y).predict(X)
    preds_b = cloned.fit(X, y).predict(X)
    assert np.array_equal(preds_a, preds_b)


def test_predict_before_fit_raises():
    with pytest.raises(NotFittedError):
        LseRegressor().predict([[0.0, 0.0]])
    with pytest.raises(NotFittedError):
        MaxAffineRegressor().predict([[0.0]])
    with pytest.raises(NotFittedError):
        GposRegressor().predict([[1.0]])


def test_lse_regressor_fits_convex_data():
    X, y = _convex_data()
    est = LseRegressor(n_terms=3, temperature=1.0, restarts=3, max_iter=2000, random_state=0)
    est.fit(X, y)
    assert isinstance(est.model_, LseModel)
    assert est.n_features_in_ == 2
    assert est.score(X, y) > 0.999
    assert est.report_.metrics.mean_abs_err < 0.05


def test_max_affine_regressor_recovers_pieces():
    data = generate_dataset(GeneratorSpec(family="max-affine", dim=2, n_terms=3, seed=2), 200)
    est = MaxAffineRegressor(n_terms=3, restarts=10, random_state=1)
    est.fit(data.inputs, data.targets)
    assert isinstance(est.model_, MaxAffineModel)
    residual = est.predict(data.inputs) - data.targets
    assert float(np.abs(residual).max()) < 1e-8


def test_gpos_regressor_fits_positive_data():
    rng = np.random.default_rng(4)
    X = rng.uniform(0.5, 2.0, (120, 2))
    y = X[:, 0] * X[:, 1] + np.sqrt(X[:, 0])
    est = GposRegressor(n_terms=3, temperature=0.1, restarts=3, max_iter=1500, random_state=0)
    est.fit(X, y)
    assert isinstance(est.model_, GposModel)
    preds = est.predict(X)
    assert np.all(preds > 0)
    rel = np.abs(preds - y) / np.minimum(preds, y)
    assert rel.mean() < 0.02
    with pytest.raises(ValueError, match="positive"):
        est.fit(X, -y)


def test_gpos_regressor_rejects_nonpositive_predict_inputs():
    rng = np.random.default_rng(5)
    X = rng.uniform(0.5, 2.0, (30, 1))
    y = X[:, 0] ** 2
    est = GposRegressor(n_terms=1, restarts=1, max_iter=300).fit(X, y)
    with pytest.raises(ValueError):
        est.predict([[0.0]])
