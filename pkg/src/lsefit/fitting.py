"""Least-squares training of the model classes.

The log-sum-exp trainer pre-scales data by the temperature, fits a
unit-temperature model with full-batch gradient descent (heavy-ball momentum
plus Armijo backtracking, so accepted steps never increase the loss), and maps
the result back via the exact temperature-scaling identity.  Max-affine models
use the alternating partition-and-refit heuristic.  Everything is
deterministic given the seed: restarts and cross-validation cells are
independent computations merged in index order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .config import DEFAULTS
from .data import CONVEX, LOGLOG, Dataset
from .models import (
    GposModel,
    LseModel,
    MaxAffineModel,
    Model,
    evaluate,
    lse_to_gpos,
)
from .validation import check_positive_scalar


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the log-sum-exp trainer.

    ``n_terms`` and ``temperature`` select the model class; the rest controls
    the descent loop.  ``ridge`` weights a squared penalty on the exponent
    entries.  With ``warm_start`` the first restart is initialized from a
    max-affine partition fit instead of a random perturbation.
    """

    n_terms: int = 3
    temperature: float = 1.0
    max_iter: int = DEFAULTS.fit_max_iter
    restarts: int = 5
    seed: int = 0
    ridge: float = 0.0
    tol: float = DEFAULTS.fit_tol
    init_step: float = 1.0
    momentum: float = 0.9
    armijo: float = 1e-4
    shrink: float = 0.5
    grow: float = 2.0
    max_backtracks: int = 60
    init_spread: float = 0.5
    warm_start: bool = True

    def __post_init__(self):
        if self.n_terms < 1:
            raise ValueError(f"n_terms must be >= 1, got {self.n_terms}")
        check_positive_scalar(self.temperature, "temperature")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.ridge < 0.0:
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class Metrics:
    """Mean/max absolute and relative errors of predictions against targets.

    Relative error divides by the smaller magnitude of prediction and target;
    pairs with a zero denominator are counted in ``n_undefined_rel`` and left
    out of the relative means and maxima.
    """

    mean_abs_err: float
    max_abs_err: float
    mean_rel_err: float
    max_rel_err: float
    n_undefined_rel: int = 0

    def to_dict(self) -> dict:
        return {
            "mean_abs_err": self.mean_abs_err,
            "max_abs_err": self.max_abs_err,
            "mean_rel_err": self.mean_rel_err,
            "max_rel_err": self.max_rel_err,
            "n_undefined_rel": self.n_undefined_rel,
        }


@dataclass(frozen=True)
class FitReport:
    """Outcome of one training run."""

    loss: float
    n_iterations: int
    restart_losses: list[float]
    loss_history: np.ndarray
    metrics: Metrics
    best_restart: int

    def to_dict(self) -> dict:
        return {
            "loss": self.loss,
            "n_iterations": self.n_iterations,
            "restart_losses": list(self.restart_losses),
            "loss_history": [float(v) for v in self.loss_history],
            "metrics": self.metrics.to_dict(),
            "best_restart": self.best_restart,
        }


def predictions(model: Model, data: Dataset) -> np.ndarray:
    return np.atleast_1d(evaluate(model, data.inputs))


def compute_metrics(model: Model, data: Dataset) -> Metrics:
    """Prediction-error summary with the smaller-magnitude denominator."""
    preds = predictions(model, data)
    abs_err = np.abs(preds - data.targets)
    denom = np.minimum(np.abs(preds), np.abs(data.targets))
    defined = denom > 0.0
    rel = abs_err[defined] / denom[defined]
    return Metrics(
        mean_abs_err=float(abs_err.mean()),
        max_abs_err=float(abs_err.max()),
        mean_rel_err=float(rel.mean()) if rel.size else 0.0,
        max_rel_err=float(rel.max()) if rel.size else 0.0,
        n_undefined_rel=int(np.count_nonzero(~defined)),
    )


# ---------------------------------------------------------------------------
# unit-temperature loss and descent engine
# ---------------------------------------------------------------------------

def _lse_loss_grad(exponents, offsets, inputs, targets, ridge):
    """Sum-of-squares loss of a unit-temperature model and its parameter
    gradients.  The per-point gradient weights are the softmax of the scores:
    d value / d offset_k = w_k and d value / d exponents_k = w_k * x."""
    scores = inputs @ exponents.T + offsets
    high = scores.max(axis=1, keepdims=True)
    expd = np.exp(scores - high)
    norm = expd.sum(axis=1)
    values = high[:, 0] + np.log(norm)
    weights = expd / norm[:, None]
    resid = values - targets
    loss = float(resid @ resid) + ridge * float((exponents * exponents).sum())
    grad_offsets = 2.0 * (weights.T @ resid)
    grad_exponents = 2.0 * ((weights * resid[:, None]).T @ inputs) + 2.0 * ridge * exponents
    return loss, grad_exponents, grad_offsets


class _Objective:
    """Flattened-parameter view of the unit-temperature loss."""

    def __init__(self, inputs, targets, n_terms, ridge):
        self.inputs = inputs
        self.targets = targets
        self.n_terms = n_terms
        self.n_inputs = inputs.shape[1]
        self.ridge = ridge

    def pack(self, exponents, offsets):
        return np.concatenate([np.ravel(exponents), offsets])

    def unpack(self, theta):
        split = self.n_terms * self.n_inputs
        return theta[:split].reshape(self.n_terms, self.n_inputs), theta[split:]

    def __call__(self, theta):
        exponents, offsets = self.unpack(theta)
        loss, g_exp, g_off = _lse_loss_grad(
            exponents, offsets, self.inputs, self.targets, self.ridge
        )
        return loss, np.concatenate([np.ravel(g_exp), g_off])


def _descend(objective, theta, config):
    """Monotone heavy-ball descent with Armijo backtracking.

    The trial step length is seeded with the spectral (Barzilai-Borwein)
    ratio of the last accepted move whenever its curvature is positive, which
    copes with badly conditioned valleys; backtracking then enforces a
    sufficient decrease, so the recorded loss history is strictly decreasing
    until the gradient tolerance or the iteration cap is hit.
    """
    loss, grad = objective(theta)
    if not math.isfinite(loss):
        raise ValueError("non-finite loss at the initial point")
    history = [loss]
    velocity = np.zeros_like(theta)
    step = config.init_step
    prev_theta = None
    prev_grad = None
    iterations = 0
    for _ in range(config.max_iter):
        if np.max(np.abs(grad)) <= config.tol:
            break
        direction = config.momentum * velocity - grad
        slope = float(direction @ grad)
        if slope >= 0.0:
            velocity[:] = 0.0
            direction = -grad
            slope = -float(grad @ grad)
        if prev_theta is not None:
            move = theta - prev_theta
            grad_change = grad - prev_grad
            curvature = float(move @ grad_change)
            if curvature > 0.0:
                step = min(max(curvature / float(grad_change @ grad_change), 1e-12), 1e12)
            else:
                step = min(step * config.grow, 1e12)
        else:
            step = min(step * config.grow, 1e12)
        accepted = False
        for _ in range(config.max_backtracks):
            candidate = theta + step * direction
            cand_loss, cand_grad = objective(candidate)
            if math.isfinite(cand_loss) and cand_loss <= loss + config.armijo * step * slope:
                accepted = True
                break
            step *= config.shrink
        if not accepted:
            if velocity.any():
                # momentum is blocking progress; drop it and retry
                velocity[:] = 0.0
                step = config.init_step
                continue
            break
        prev_theta, prev_grad = theta, grad
        velocity = step * direction
        theta = candidate
        loss, grad = cand_loss, cand_grad
        history.append(loss)
        iterations += 1
    return theta, np.asarray(history), iterations


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def _affine_baseline(inputs, targets):
    design = np.column_stack([inputs, np.ones(inputs.shape[0])])
    coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
    return coef[:-1], coef[-1]


def _random_init(objective, rng, config, base_slope):
    inputs, targets = objective.inputs, objective.targets
    n_terms = config.n_terms
    exponents = base_slope + config.init_spread * rng.standard_normal(
        (n_terms, objective.n_inputs)
    )
    levels = np.quantile(targets, (np.arange(n_terms) + 1.0) / (n_terms + 1.0))
    offsets = levels - exponents @ inputs.mean(axis=0) - math.log(n_terms)
    return exponents, offsets


def _warm_init(objective, data_scaled, config):
    # the partition fit is cheap next to the descent, so give it a fixed
    # number of restarts regardless of how many descent restarts were asked
    model, _ = fit_max_affine(
        data_scaled,
        n_terms=config.n_terms,
        seed=config.seed,
        restarts=5,
    )
    exponents = np.array(model.exponents)
    offsets = np.array(model.offsets)
    # recenter so the smooth model's systematic overshoot averages out
    scores = data_scaled.inputs @ exponents.T + offsets
    high = scores.max(axis=1, keepdims=True)
    values = high[:, 0] + np.log(np.exp(scores - high).sum(axis=1))
    offsets -= float(np.mean(values - data_scaled.targets))
    return exponents, offsets


# ---------------------------------------------------------------------------
# trainers
# ---------------------------------------------------------------------------

def fit_lse(data: Dataset, config: FitConfig) -> tuple[LseModel, FitReport]:
    """Fit a log-sum-exp model to convex-space data.

    Inputs and targets are divided by the temperature, a unit-temperature
    model is trained on the scaled data, and the result is mapped back by
    multiplying the fitted offsets by the temperature.  The reported loss and
    loss history are in original units (scaled by temperature squared), and
    the best restart is chosen by final training loss with ties going to the
    lower restart index.
    """
    if data.space != CONVEX:
        raise ValueError(f"fit_lse expects convex-space data, got {data.space!r}")
    if data.n_samples < config.n_terms:
        warnings.warn(
            f"fitting {config.n_terms} terms to {data.n_samples} samples; "
            "the model is underdetermined",
            stacklevel=2,
        )
    temperature = config.temperature
    scaled = Dataset(data.inputs / temperature, data.targets / temperature, CONVEX)
    objective = _Objective(scaled.inputs, scaled.targets, config.n_terms, config.ridge)
    base_slope, _ = _affine_baseline(scaled.inputs, scaled.targets)

    inits = []
    if config.warm_start:
        inits.append(_warm_init(objective, scaled, config))
    while len(inits) < config.restarts:
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, len(inits)]))
        inits.append(_random_init(objective, rng, config, base_slope))

    runs = []
    for index, (exponents, offsets) in enumerate(inits):
        try:
            theta, history, iterations = _descend(
                objective, objective.pack(exponents, offsets), config
            )
        except ValueError as exc:
            raise ValueError(f"restart {index}: {exc}") from exc
        runs.append((history[-1], index, theta, history, iterations))

    best_loss, best_index, best_theta, best_history, best_iters = min(
        runs, key=lambda run: (run[0], run[1])
    )
    exponents, offsets = objective.unpack(best_theta)
    model = LseModel(temperature, exponents, temperature * offsets)
    scale_sq = temperature * temperature
    report = FitReport(
        loss=scale_sq * best_loss,
        n_iterations=best_iters,
        restart_losses=[scale_sq * run[0] for run in runs],
        loss_history=scale_sq * best_history,
        metrics=compute_metrics(model, data),
        best_restart=best_index,
    )
    return model, report


def fit_max_affine(
    data: Dataset,
    n_terms: int,
    seed: int = 0,
    restarts: int = 1,
    max_iter: int = 200,
) -> tuple[MaxAffineModel, FitReport]:
    """Fit a max-affine model by alternating partition and per-cell least squares.

    Points are assigned to the piece attaining the maximum, each cell is refit
    by least squares, and the loop stops when the partition is stable (or the
    loss repeats, which signals a cycle).  A cell that loses all its points is
    reseeded with the worst-fit points of the current model.  The best of
    ``restarts`` random initial partitions is returned.
    """
    if data.space != CONVEX:
        raise ValueError(f"fit_max_affine expects convex-space data, got {data.space!r}")
    inputs, targets = data.inputs, data.targets
    n_samples, n_inputs = inputs.shape
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    if n_samples < n_terms:
        raise ValueError(f"need at least {n_terms} samples, got {n_samples}")
    design = np.column_stack([inputs, np.ones(n_samples)])
    reseed_size = min(n_samples, n_inputs + 2)

    best = None
    for restart in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, restart]))
        assign = rng.integers(n_terms, size=n_samples)
        anchors = rng.choice(n_samples, size=n_terms, replace=False)
        assign[anchors] = np.arange(n_terms)
        params = np.zeros((n_terms, n_inputs + 1))
        history = []
        iterations = 0
        for iteration in range(max_iter):
            for k in range(n_terms):
                members = assign == k
                if not members.any():
                    resid = np.abs(np.max(design @ params.T, axis=1) - targets)
                    worst = np.argsort(-resid, kind="stable")[:reseed_size]
                    assign[worst] = k
                    members = assign == k
                params[k], *_ = np.linalg.lstsq(design[members], targets[members], rcond=None)
            scores = design @ params.T
            loss = float(np.sum((scores.max(axis=1) - targets) ** 2))
            history.append(loss)
            iterations = iteration + 1
            new_assign = scores.argmax(axis=1)
            if np.array_equal(new_assign, assign):
                break
            if len(history) >= 2 and history[-1] >= history[-2] - 1e-14 * max(1.0, history[-2]):
                break  # stalled or cycling partition
            assign = new_assign
        run = (history[-1], restart, params.copy(), history, iterations)
        if best is None or (run[0], run[1]) < (best[0], best[1]):
            best = run

    loss, best_restart, params, history, iterations = best
    model = MaxAffineModel(params[:, :n_inputs], params[:, n_inputs])
    report = FitReport(
        loss=loss,
        n_iterations=iterations,
        restart_losses=[loss],
        loss_history=np.asarray(history),
        metrics=compute_metrics(model, data),
        best_restart=best_restart,
    )
    return model, report


def init_lse_from_max_affine(model: MaxAffineModel, temperature: float) -> LseModel:
    """Copy max-affine parameters into a log-sum-exp model at the given
    temperature; the two functions then differ by at most T*log(K)."""
    return LseModel(temperature, model.exponents, model.offsets)


def fit_gpos(data: Dataset, config: FitConfig) -> tuple[GposModel, FitReport]:
    """Fit a generalized posynomial to positive data.

    The data is log-transformed entry-wise, a log-sum-exp model is fitted in
    log space, and the result is conjugated back.  The reported loss is the
    log-space training loss; the metrics are computed on original values, so
    the relative columns use the smaller-magnitude denominator convention.
    """
    if data.space != LOGLOG:
        raise ValueError(f"fit_gpos expects log-log data, got {data.space!r}")
    lse_model, lse_report = fit_lse(data.log_transformed(), config)
    model = lse_to_gpos(lse_model)
    report = replace(lse_report, metrics=compute_metrics(model, data))
    return model, report


def fit_dataset(data: Dataset, config: FitConfig) -> tuple[Model, FitReport]:
    """Fit the model class matching the dataset's space."""
    if data.space == LOGLOG:
        return fit_gpos(data, config)
    return fit_lse(data, config)
