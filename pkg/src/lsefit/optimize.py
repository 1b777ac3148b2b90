"""Box-constrained minimization of fitted models.

Log-sum-exp objectives are smooth and convex, so projected gradient descent
with Armijo backtracking converges to the global box-constrained minimum.
Posynomial objectives are handled by the exact log transform: minimize the
conjugate log-sum-exp model over the log of the box and map the result back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS
from .models import GposModel, LseModel, gpos_to_lse, lse_gradient, lse_value
from .validation import as_float_vector


@dataclass(frozen=True)
class BoxConstraints:
    """Per-coordinate bounds ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = as_float_vector(self.lower, "lower")
        upper = as_float_vector(self.upper, "upper")
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(lower > upper):
            i = int(np.argmax(lower > upper))
            raise ValueError(f"lower[{i}] = {lower[i]} exceeds upper[{i}] = {upper[i]}")
        lower = lower.copy()
        upper = upper.copy()
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol)
        )

    def log_box(self) -> "BoxConstraints":
        if np.any(self.lower <= 0.0):
            raise ValueError("log transform needs strictly positive bounds")
        return BoxConstraints(np.log(self.lower), np.log(self.upper))


@dataclass(frozen=True)
class SolveReport:
    """Result of a box-constrained solve.

    ``stationarity`` is the norm of the projected gradient step at the
    returned point; for posynomial solves it is measured in log space, where
    the problem is actually solved.  ``reciprocal_objective`` is filled by
    the reciprocal-surrogate workflow only.
    """

    minimizer: np.ndarray
    objective: float
    n_iterations: int
    stationarity: float
    converged: bool
    reciprocal_objective: float | None = None

    def to_dict(self) -> dict:
        doc = {
            "minimizer": [float(v) for v in self.minimizer],
            "objective": self.objective,
            "n_iterations": self.n_iterations,
            "stationarity": self.stationarity,
            "converged": self.converged,
        }
        if self.reciprocal_objective is not None:
            doc["reciprocal_objective"] = self.reciprocal_objective
        return doc


def _projected_gradient_norm(box: BoxConstraints, x: np.ndarray, grad: np.ndarray) -> float:
    return float(np.linalg.norm(x - box.project(x - grad)))


def minimize_lse_box(
    model: LseModel,
    box: BoxConstraints,
    tol: float = DEFAULTS.solver_tol,
    max_iter: int = DEFAULTS.solver_max_iter,
) -> SolveReport:
    """Minimize a log-sum-exp model over a box by projected gradient descent.

    Starts at the box center and accepts only steps that satisfy an Armijo
    decrease along the projection arc, so the objective is non-increasing.
    By convexity the returned point is a global minimizer up to the
    stationarity tolerance.
    """
    if box.dim != model.n_inputs:
        raise ValueError(
            f"box has dimension {box.dim} but the model expects {model.n_inputs}"
        )
    x = box.center()
    value = lse_value(model, x)
    if not math.isfinite(value):
        raise ValueError("objective is non-finite at the box center")
    grad = lse_gradient(model, x)
    step = 1.0
    iterations = 0
    converged = False
    for _ in range(max_iter):
        stationarity = _projected_gradient_norm(box, x, grad)
        if stationarity <= tol:
            converged = True
            break
        step = min(step * 2.0, 1e12)
        moved = False
        for _ in range(200):
            candidate = box.project(x - step * grad)
            shift = candidate - x
            if not shift.any():
                break
            cand_value = lse_value(model, candidate)
            if math.isfinite(cand_value) and cand_value <= value + 1e-4 * float(grad @ shift):
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        x = candidate
        value = cand_value
        grad = lse_gradient(model, x)
        iterations += 1
    stationarity = _projected_gradient_norm(box, x, grad)
    if stationarity <= tol:
        converged = True
    return SolveReport(
        minimizer=x,
        objective=float(value),
        n_iterations=iterations,
        stationarity=stationarity,
        converged=converged,
    )


def solve_gp_box(
    model: GposModel,
    box: BoxConstraints,
    tol: float = DEFAULTS.solver_tol,
    max_iter: int = DEFAULTS.solver_max_iter,
) -> SolveReport:
    """Minimize a posynomial over a positive box via the log transform.

    Equivalent to ``minimize_lse_box(gpos_to_lse(model), log box)``; the
    minimizer and objective are mapped back with exp and reported in the
    original positive units.
    """
    if np.any(box.lower <= 0.0):
        i = int(np.argmax(box.lower <= 0.0))
        raise ValueError(f"posynomial box bounds must be positive; lower[{i}] = {box.lower[i]}")
    inner = minimize_lse_box(gpos_to_lse(model), box.log_box(), tol=tol, max_iter=max_iter)
    minimizer = box.project(np.exp(inner.minimizer))
    return SolveReport(
        minimizer=minimizer,
        objective=float(np.exp(inner.objective)),
        n_iterations=inner.n_iterations,
        stationarity=inner.stationarity,
        converged=inner.converged,
    )


def maximize_via_reciprocal(
    model: LseModel | GposModel,
    box: BoxConstraints,
    tol: float = DEFAULTS.solver_tol,
    max_iter: int = DEFAULTS.solver_max_iter,
) -> SolveReport:
    """Maximize a quantity through a surrogate fitted to its reciprocal.

    Minimizes the surrogate over the box and reports both the surrogate value
    and its reciprocal, the estimated maximum of the original quantity.
    """
    if isinstance(model, GposModel):
        report = solve_gp_box(model, box, tol=tol, max_iter=max_iter)
    elif isinstance(model, LseModel):
        report = minimize_lse_box(model, box, tol=tol, max_iter=max_iter)
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    reciprocal = math.inf if report.objective == 0.0 else 1.0 / report.objective
    return SolveReport(
        minimizer=report.minimizer,
        objective=report.objective,
        n_iterations=report.n_iterations,
        stationarity=report.stationarity,
        converged=report.converged,
        reciprocal_objective=reciprocal,
    )
