"""Synthetic ground-truth generators and brute-force oracles.

The generator families are convex (or log-log-convex) by construction and
fully determined by a seed, so they double as independent references when
testing the fitting and optimization pipelines.  ``grid_minimize`` is the
exhaustive oracle for the box-constrained solvers, and
``build_subgradient_approximator`` assembles a smooth model from supporting
hyperplanes sampled on a convex function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import DEFAULTS
from .data import CONVEX, LOGLOG, Dataset
from .exceptions import CapacityError, SchemaError
from .models import (
    GposModel,
    LseModel,
    MaxAffineModel,
    gpos_value,
    lse_gradient,
    lse_value,
    max_affine_value,
)
from .validation import as_float_matrix, as_float_vector

FAMILIES = ("quadratic", "norm", "max-affine", "lse", "posynomial")


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a synthetic dataset.

    ``lower``/``upper`` bound the sampling box (scalars broadcast over the
    dimension); when omitted they default to [-1, 1] for convex families and
    [0.5, 2] for the posynomial family.  ``noise`` is the standard deviation
    of additive Gaussian noise, applied in log space for positive targets so
    they stay positive.
    """

    family: str
    dim: int
    n_terms: int = 3
    gen_temperature: float = 1.0
    noise: float = 0.0
    lower: float | None = None
    upper: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.n_terms < 1:
            raise ValueError(f"n_terms must be >= 1, got {self.n_terms}")
        if self.gen_temperature <= 0:
            raise ValueError("gen_temperature must be positive")
        if self.noise < 0:
            raise ValueError(f"noise must be >= 0, got {self.noise}")

    @property
    def space(self) -> str:
        return LOGLOG if self.family == "posynomial" else CONVEX

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        default_lower, default_upper = (0.5, 2.0) if self.space == LOGLOG else (-1.0, 1.0)
        lower = np.full(self.dim, default_lower if self.lower is None else self.lower)
        upper = np.full(self.dim, default_upper if self.upper is None else self.upper)
        if np.any(lower >= upper):
            raise ValueError("sampling box must have lower < upper")
        if self.space == LOGLOG and np.any(lower <= 0):
            raise ValueError("posynomial sampling box must be positive")
        return lower, upper

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "dim": self.dim,
            "n_terms": self.n_terms,
            "gen_temperature": self.gen_temperature,
            "noise": self.noise,
            "lower": self.lower,
            "upper": self.upper,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GeneratorSpec":
        if not isinstance(doc, dict) or "family" not in doc or "dim" not in doc:
            raise SchemaError("generator spec must be an object with 'family' and 'dim'")
        known = {
            "family", "dim", "n_terms", "gen_temperature", "noise",
            "lower", "upper", "seed",
        }
        unknown = set(doc) - known
        if unknown:
            raise SchemaError(f"generator spec has unknown fields {sorted(unknown)}")
        try:
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"invalid generator spec: {exc}") from exc


class Generator:
    """A concrete synthetic family: callable truth plus optional exact model."""

    def __init__(self, spec: GeneratorSpec):
        self.spec = spec
        self.lower, self.upper = spec.box()
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0]))
        self.model = None
        if spec.family == "max-affine":
            self.model = MaxAffineModel(
                rng.standard_normal((spec.n_terms, spec.dim)),
                rng.standard_normal(spec.n_terms),
            )
        elif spec.family == "lse":
            self.model = LseModel(
                spec.gen_temperature,
                rng.standard_normal((spec.n_terms, spec.dim)),
                rng.standard_normal(spec.n_terms),
            )
        elif spec.family == "posynomial":
            self.model = GposModel(
                1.0,
                rng.uniform(0.5, 2.0, spec.n_terms),
                rng.uniform(-2.0, 2.0, (spec.n_terms, spec.dim)),
            )

    def func(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        family = self.spec.family
        if family == "quadratic":
            return np.sum(points * points, axis=-1)
        if family == "norm":
            return np.linalg.norm(points, axis=-1)
        if family == "max-affine":
            return np.atleast_1d(max_affine_value(self.model, points))
        if family == "lse":
            return np.atleast_1d(lse_value(self.model, points))
        return np.atleast_1d(gpos_value(self.model, points))

    def subgradient(self, points) -> np.ndarray:
        """One subgradient per point; at kinks a fixed valid choice is made."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        family = self.spec.family
        if family == "quadratic":
            return 2.0 * points
        if family == "norm":
            norms = np.linalg.norm(points, axis=-1, keepdims=True)
            out = np.zeros_like(points)
            np.divide(points, norms, out=out, where=norms > 0)
            return out
        if family == "max-affine":
            scores = points @ self.model.exponents.T + self.model.offsets
            return self.model.exponents[scores.argmax(axis=1)]
        if family == "lse":
            return np.atleast_2d(lse_gradient(self.model, points))
        raise ValueError(f"subgradients are not defined for family {family!r}")

    def sample(self, n_samples: int) -> Dataset:
        if n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {n_samples}")
        spec = self.spec
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1]))
        points = rng.uniform(self.lower, self.upper, (n_samples, spec.dim))
        values = self.func(points)
        if spec.noise > 0:
            noise = rng.standard_normal(n_samples) * spec.noise
            if spec.space == LOGLOG:
                values = np.exp(np.log(values) + noise)
            else:
                values = values + noise
        return Dataset(points, values, spec.space)


def generate_dataset(spec: GeneratorSpec, n_samples: int) -> Dataset:
    """Deterministic dataset for the given spec; same spec, same bytes."""
    return Generator(spec).sample(n_samples)


def save_spec(spec: GeneratorSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


def load_spec(path) -> GeneratorSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return GeneratorSpec.from_dict(doc)


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------

def grid_points(lower, upper, points_per_axis: int) -> np.ndarray:
    """Uniform grid over a box, rows in lexicographic order of the axes."""
    lower = as_float_vector(np.atleast_1d(np.asarray(lower, dtype=float)), "lower")
    upper = as_float_vector(np.atleast_1d(np.asarray(upper, dtype=float)), "upper")
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def grid_minimize(
    func,
    lower,
    upper,
    points_per_axis: int,
    max_points: int = DEFAULTS.grid_max_points,
) -> tuple[np.ndarray, float]:
    """Exhaustive minimization over a uniform grid.

    ``func`` must accept a batch of points (m, n) and return (m,) values.
    Ties go to the lexicographically smallest grid index.  Guards refuse
    grids that are too large to enumerate.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    dim = lower.shape[0]
    if points_per_axis < 2:
        raise ValueError(f"points_per_axis must be >= 2, got {points_per_axis}")
    if dim > DEFAULTS.grid_max_dim:
        raise CapacityError(
            f"exhaustive grids are limited to {DEFAULTS.grid_max_dim} dimensions, got {dim}"
        )
    total = points_per_axis**dim
    if total > max_points:
        raise CapacityError(f"grid of {total} points exceeds the budget of {max_points}")
    points = grid_points(lower, upper, points_per_axis)
    best_value = np.inf
    best_index = -1
    chunk = 262_144
    for start in range(0, total, chunk):
        values = np.asarray(func(points[start : start + chunk]), dtype=float)
        local = int(np.argmin(values))
        if values[local] < best_value:
            best_value = float(values[local])
            best_index = start + local
    return points[best_index].copy(), best_value


def build_subgradient_approximator(points, values, subgradients, temperature: float) -> LseModel:
    """Smooth model from sampled supporting hyperplanes of a convex function.

    Each sample contributes the affine piece ``f(x_k) + <v_k, x - x_k>``; the
    pieces are combined at the given temperature.  With exact subgradients the
    underlying max-affine function never exceeds the true function, and the
    smooth model sits at most ``T * log(j)`` above it.
    """
    points = as_float_matrix(points, "points")
    values = as_float_vector(values, "values")
    subgradients = as_float_matrix(subgradients, "subgradients")
    if points.shape != subgradients.shape or points.shape[0] != values.shape[0]:
        raise ValueError("points, values, and subgradients must agree in shape")
    offsets = values - np.sum(subgradients * points, axis=1)
    return LseModel(temperature, subgradients, offsets)


def max_affine_stage(model: LseModel) -> MaxAffineModel:
    """The piecewise-linear skeleton sharing the model's parameters."""
    return MaxAffineModel(model.exponents, model.offsets)
