"""Scaled-down verification checks behind the ``bench`` subcommand.

Each check exercises one structural identity or pipeline guarantee at a size
that runs in well under a second, and reports a pass flag plus the measured
quantity.  The full-size versions live in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .config import DEFAULTS
from .data import CONVEX, Dataset
from .fitting import FitConfig, fit_lse, fit_max_affine
from .models import (
    LseModel,
    MaxAffineModel,
    gpos_value,
    lse_to_gpos,
    lse_value,
    max_affine_value,
    reduce_temperature,
    rescale_to_unit_temperature,
)
from .optimize import BoxConstraints, minimize_lse_box
from .synth import GeneratorSpec, Generator, grid_minimize


def _random_model(rng, n_terms, dim, temperature) -> LseModel:
    return LseModel(
        temperature,
        rng.standard_normal((n_terms, dim)),
        rng.standard_normal(n_terms),
    )


def _check_sandwich(rng) -> tuple[bool, str]:
    worst_low = 0.0
    worst_high = -math.inf
    pairs = 0
    for temperature in (1.0, 0.1, 0.01):
        for _ in range(40):
            n_terms = int(rng.integers(1, 12))
            model = _random_model(rng, n_terms, 3, temperature)
            skeleton = MaxAffineModel(model.exponents, model.offsets)
            points = rng.uniform(-2, 2, (25, 3))
            gap = lse_value(model, points) - max_affine_value(skeleton, points)
            worst_low = min(worst_low, float(gap.min()))
            worst_high = max(worst_high, float((gap - temperature * math.log(n_terms)).max()))
            pairs += points.shape[0]
    ok = worst_low >= -DEFAULTS.sandwich_atol and worst_high <= DEFAULTS.sandwich_atol
    return ok, f"{pairs} pairs, slack [{worst_low:.2e}, {worst_high:.2e}]"


def _check_scaling(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(200):
        model = _random_model(rng, int(rng.integers(1, 8)), 2, float(rng.uniform(0.02, 5.0)))
        unit, scale = rescale_to_unit_temperature(model)
        x = rng.uniform(-2, 2, 2)
        direct = lse_value(model, x)
        via_unit = scale * lse_value(unit, x / scale)
        worst = max(worst, abs(direct - via_unit) / max(1.0, abs(direct)))
    return worst <= DEFAULTS.scaling_rtol, f"max deviation {worst:.2e}"


def _check_reduction(rng) -> tuple[bool, str]:
    worst = 0.0
    for n_terms, power in ((2, 2), (3, 2), (2, 3)):
        model = _random_model(rng, n_terms, 2, 0.7)
        reduced = reduce_temperature(model, power)
        expected_terms = math.comb(n_terms + power - 1, power)
        if reduced.n_terms != expected_terms:
            return False, f"expected {expected_terms} terms, got {reduced.n_terms}"
        points = rng.uniform(-2, 2, (50, 2))
        diff = np.abs(lse_value(reduced, points) - lse_value(model, points))
        ref = np.maximum(1.0, np.abs(lse_value(model, points)))
        worst = max(worst, float((diff / ref).max()))
    return worst <= DEFAULTS.reduction_rtol, f"max deviation {worst:.2e}"


def _check_conjugation(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        model = _random_model(rng, int(rng.integers(1, 6)), 2, float(rng.uniform(0.1, 2.0)))
        gpos = lse_to_gpos(model)
        z = rng.uniform(0.2, 3.0, 2)
        ratio = gpos_value(gpos, z) / math.exp(lse_value(model, np.log(z)))
        worst = max(worst, abs(ratio - 1.0))
    return worst <= DEFAULTS.conjugation_rtol, f"max ratio error {worst:.2e}"


def _check_fit(rng) -> tuple[bool, str]:
    seed = int(rng.integers(0, 2**31))
    spec = GeneratorSpec(family="max-affine", dim=2, n_terms=3, seed=seed)
    data = Generator(spec).sample(120)
    _, report = fit_max_affine(data, n_terms=3, seed=seed, restarts=5)
    mse = report.loss / data.n_samples
    return mse <= 1e-8, f"partition fit mse {mse:.2e}"


def _check_optimize(rng) -> tuple[bool, str]:
    seed = int(rng.integers(0, 2**31))
    gen_rng = np.random.default_rng(seed)
    model = _random_model(gen_rng, 5, 2, 0.5)
    box = BoxConstraints(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    report = minimize_lse_box(model, box)
    _, grid_best = grid_minimize(lambda pts: lse_value(model, pts), box.lower, box.upper, 101)
    cell = np.linalg.norm((box.upper - box.lower) / 100.0)
    lipschitz = float(np.linalg.norm(model.exponents, axis=1).max())
    ok = (
        report.converged
        and box.contains(report.minimizer)
        and report.objective <= grid_best + 1e-6
        and grid_best - report.objective <= lipschitz * cell + 1e-9
    )
    return ok, f"objective {report.objective:.6f}, grid {grid_best:.6f}"


def _check_training_descent(rng) -> tuple[bool, str]:
    seed = int(rng.integers(0, 2**31))
    spec = GeneratorSpec(family="quadratic", dim=2, seed=seed)
    data = Generator(spec).sample(80)
    config = FitConfig(n_terms=4, temperature=0.5, restarts=2, max_iter=300, seed=seed)
    _, report = fit_lse(data, config)
    drops = np.diff(report.loss_history)
    ok = bool((drops <= 0).all())
    return ok, f"final loss {report.loss:.4e} after {report.n_iterations} steps"


def run_bench(seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    checks = [
        ("sandwich bound", _check_sandwich),
        ("temperature scaling identity", _check_scaling),
        ("temperature reduction", _check_reduction),
        ("posynomial conjugation", _check_conjugation),
        ("partition fit recovery", _check_fit),
        ("box solve vs grid oracle", _check_optimize),
        ("monotone training descent", _check_training_descent),
    ]
    results = []
    for name, check in checks:
        passed, detail = check(rng)
        results.append({"name": name, "passed": bool(passed), "detail": detail})
    return results
