"""Scaled log-sum-exp, max-affine, and generalized posynomial models.

All model types are immutable value objects and every function here is pure,
so instances can be evaluated concurrently without synchronization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from pathlib import Path

import numpy as np

from .config import DEFAULTS
from .exceptions import CapacityError, SchemaError
from .validation import as_points


def _frozen_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-d, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _check_temperature(value) -> float:
    t = float(value)
    if not math.isfinite(t) or t <= 0.0:
        raise ValueError(f"temperature must be positive and finite, got {value!r}")
    return t


@dataclass(frozen=True)
class LseModel:
    """Smooth convex model ``x -> T * log(sum_k exp((<a_k, x> + b_k) / T))``.

    ``exponents`` stacks the slope rows ``a_k`` (shape K x n) and ``offsets``
    holds the intercepts ``b_k``.  ``temperature`` controls smoothness: as it
    shrinks, the model approaches the max-affine function with the same
    parameters.
    """

    temperature: float
    exponents: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        exps = _frozen_array(self.exponents, "exponents", 2)
        offs = _frozen_array(self.offsets, "offsets", 1)
        if exps.shape[0] != offs.shape[0]:
            raise ValueError(
                f"exponents have {exps.shape[0]} rows but offsets have "
                f"{offs.shape[0]} entries"
            )
        object.__setattr__(self, "temperature", _check_temperature(self.temperature))
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "offsets", offs)

    @property
    def n_terms(self) -> int:
        return self.exponents.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.exponents.shape[1]


@dataclass(frozen=True)
class MaxAffineModel:
    """Piecewise-linear convex model ``x -> max_k (b_k + <a_k, x>)``."""

    exponents: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        exps = _frozen_array(self.exponents, "exponents", 2)
        offs = _frozen_array(self.offsets, "offsets", 1)
        if exps.shape[0] != offs.shape[0]:
            raise ValueError(
                f"exponents have {exps.shape[0]} rows but offsets have "
                f"{offs.shape[0]} entries"
            )
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "offsets", offs)

    @property
    def n_terms(self) -> int:
        return self.exponents.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.exponents.shape[1]


@dataclass(frozen=True)
class GposModel:
    """Generalized posynomial ``z -> (sum_k c_k * prod_i z_i^(a_ki / T))^T``.

    Defined on strictly positive inputs only; all coefficients ``c_k`` are
    strictly positive, which makes the model log-log-convex.
    """

    temperature: float
    coefficients: np.ndarray
    exponents: np.ndarray

    def __post_init__(self):
        exps = _frozen_array(self.exponents, "exponents", 2)
        coeffs = _frozen_array(self.coefficients, "coefficients", 1)
        if exps.shape[0] != coeffs.shape[0]:
            raise ValueError(
                f"exponents have {exps.shape[0]} rows but coefficients have "
                f"{coeffs.shape[0]} entries"
            )
        if np.any(coeffs <= 0.0):
            k = int(np.argmax(coeffs <= 0.0))
            raise ValueError(f"coefficients must be strictly positive; entry {k} is {coeffs[k]}")
        object.__setattr__(self, "temperature", _check_temperature(self.temperature))
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "exponents", exps)

    @property
    def n_terms(self) -> int:
        return self.exponents.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.exponents.shape[1]


Model = LseModel | MaxAffineModel | GposModel


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _logsumexp(scores: np.ndarray) -> np.ndarray:
    # stable along the last axis; exact up to rounding for any finite scores
    high = np.max(scores, axis=-1, keepdims=True)
    return np.squeeze(high, -1) + np.log(np.sum(np.exp(scores - high), axis=-1))


def _softmax(scores: np.ndarray) -> np.ndarray:
    high = np.max(scores, axis=-1, keepdims=True)
    weights = np.exp(scores - high)
    return weights / np.sum(weights, axis=-1, keepdims=True)


def lse_value(model: LseModel, x):
    """Evaluate the model at a point (n,) or a batch of points (m, n)."""
    pts, single = as_points(x, model.n_inputs)
    scores = (pts @ model.exponents.T + model.offsets) / model.temperature
    vals = model.temperature * _logsumexp(scores)
    return float(vals[0]) if single else vals


def max_affine_value(model: MaxAffineModel, x):
    """Evaluate the max of the affine pieces at a point or batch."""
    pts, single = as_points(x, model.n_inputs)
    vals = np.max(pts @ model.exponents.T + model.offsets, axis=-1)
    return float(vals[0]) if single else vals


def gpos_value(model: GposModel, z):
    """Evaluate the posynomial at strictly positive points, in log space.

    Routing through logarithms keeps the evaluation finite whenever the true
    value fits in a float, even at very small temperatures.
    """
    pts, single = as_points(z, model.n_inputs, name="z")
    if np.any(pts <= 0.0):
        bad = np.argwhere(pts <= 0.0)[0]
        raise ValueError(
            f"z must be strictly positive; coordinate {bad[-1]} of point {bad[0]} "
            f"is {pts[tuple(bad)]}"
        )
    scores = (np.log(pts) @ model.exponents.T) / model.temperature + np.log(model.coefficients)
    vals = np.exp(model.temperature * _logsumexp(scores))
    return float(vals[0]) if single else vals


def evaluate(model: Model, x):
    """Evaluate any model type at a point or batch of points."""
    if isinstance(model, LseModel):
        return lse_value(model, x)
    if isinstance(model, MaxAffineModel):
        return max_affine_value(model, x)
    if isinstance(model, GposModel):
        return gpos_value(model, x)
    raise TypeError(f"unsupported model type {type(model).__name__}")


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def lse_gradient(model: LseModel, x):
    """Gradient in x; a convex combination of the exponent rows."""
    pts, single = as_points(x, model.n_inputs)
    weights = _softmax((pts @ model.exponents.T + model.offsets) / model.temperature)
    grads = weights @ model.exponents
    return grads[0] if single else grads


def lse_hessian(model: LseModel, x) -> np.ndarray:
    """Hessian in x: the softmax-weighted covariance of the exponent rows
    divided by the temperature.  Always symmetric positive semidefinite."""
    pts, single = as_points(x, model.n_inputs)
    if not single:
        raise ValueError("hessian is computed for a single point, got a batch")
    weights = _softmax((pts[0] @ model.exponents.T + model.offsets) / model.temperature)
    centered = model.exponents - weights @ model.exponents
    hess = (centered.T * weights) @ centered / model.temperature
    return (hess + hess.T) / 2.0


# ---------------------------------------------------------------------------
# structural transforms
# ---------------------------------------------------------------------------

def rescale_to_unit_temperature(model: LseModel) -> tuple[LseModel, float]:
    """Factor the model as ``value(x) = s * unit(x / s)`` with ``s = temperature``.

    The returned unit-temperature model keeps the exponent rows and divides
    the offsets by the temperature; the identity holds exactly.
    """
    scale = model.temperature
    return LseModel(1.0, model.exponents, model.offsets / scale), scale


def reduce_temperature(model: LseModel, p: int, max_terms: int = DEFAULTS.term_budget) -> LseModel:
    """Rewrite the model at temperature T/p without changing its values.

    Raising the inner sum to the integer power ``p`` and expanding it with the
    multinomial theorem yields an equal-valued model with
    ``comb(K + p - 1, p)`` terms, whose exponent rows are averages of ``p``
    original rows.  Term counts grow combinatorially, hence the budget.
    """
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool) or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")
    if p == 1:
        return model
    n_terms = model.n_terms
    n_new = math.comb(n_terms + p - 1, p)
    if n_new > max_terms:
        raise CapacityError(
            f"temperature reduction would create {n_new} terms, over the "
            f"budget of {max_terms}"
        )
    log_p_fact = math.lgamma(p + 1)
    exponents = np.empty((n_new, model.n_inputs))
    offsets = np.empty(n_new)
    for row, combo in enumerate(combinations_with_replacement(range(n_terms), p)):
        counts = np.bincount(combo, minlength=n_terms)
        log_multinomial = log_p_fact - sum(math.lgamma(c + 1) for c in counts)
        exponents[row] = counts @ model.exponents / p
        offsets[row] = counts @ model.offsets / p + model.temperature / p * log_multinomial
    return LseModel(model.temperature / p, exponents, offsets)


def lse_to_gpos(model: LseModel) -> GposModel:
    """Conjugate map: ``gpos_value(out, z) = exp(lse_value(model, log z))``."""
    ratios = model.offsets / model.temperature
    with np.errstate(over="ignore", under="ignore"):
        coeffs = np.exp(ratios)
    bad = ~np.isfinite(coeffs) | (coeffs <= 0.0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise OverflowError(
            f"coefficient exp(offsets[{k}]/temperature) = exp({ratios[k]:.6g}) "
            "falls outside the positive float range"
        )
    return GposModel(model.temperature, coeffs, model.exponents)


def gpos_to_lse(model: GposModel) -> LseModel:
    """Inverse conjugate map: offsets are ``T * log(coefficients)``."""
    return LseModel(model.temperature, model.exponents,
                    model.temperature * np.log(model.coefficients))


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

def model_to_dict(model: Model) -> dict:
    """Plain-dict form of a model; floats survive a JSON round trip exactly."""
    if isinstance(model, LseModel):
        return {
            "kind": "lse",
            "temperature": model.temperature,
            "exponents": model.exponents.tolist(),
            "offsets": model.offsets.tolist(),
        }
    if isinstance(model, MaxAffineModel):
        return {
            "kind": "maxaffine",
            "exponents": model.exponents.tolist(),
            "offsets": model.offsets.tolist(),
        }
    if isinstance(model, GposModel):
        return {
            "kind": "gpos",
            "temperature": model.temperature,
            "exponents": model.exponents.tolist(),
            "coefficients": model.coefficients.tolist(),
        }
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_from_dict(doc: dict) -> Model:
    if not isinstance(doc, dict):
        raise SchemaError(f"model document must be an object, got {type(doc).__name__}")
    kind = doc.get("kind")
    try:
        if kind == "lse":
            return LseModel(doc["temperature"], doc["exponents"], doc["offsets"])
        if kind == "maxaffine":
            return MaxAffineModel(doc["exponents"], doc["offsets"])
        if kind == "gpos":
            return GposModel(doc["temperature"], doc["coefficients"], doc["exponents"])
    except KeyError as exc:
        raise SchemaError(f"model document is missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid model document: {exc}") from exc
    raise SchemaError(f"unknown model kind {kind!r}")


def save_model(model: Model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> Model:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return model_from_dict(doc)
