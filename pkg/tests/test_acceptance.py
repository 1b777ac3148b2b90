"""Top-level acceptance checks.

Each test exercises one headline guarantee at its stated tolerance and prints
one PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s`` to see
them).  Several checks carry wall-clock budgets, asserted at the end.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from lsefit import (
    BoxConstraints,
    Dataset,
    FitConfig,
    GeneratorSpec,
    GposModel,
    LseModel,
    MaxAffineModel,
    build_subgradient_approximator,
    fit_gpos,
    fit_lse,
    generate_dataset,
    gpos_to_lse,
    gpos_value,
    grid_minimize,
    grid_points,
    lse_gradient,
    lse_hessian,
    lse_to_gpos,
    lse_value,
    max_affine_stage,
    max_affine_value,
    minimize_lse_box,
    solve_gp_box,
)
from lsefit.cli import EXIT_OK, main as cli_main
from helpers import rel_dev


@contextmanager
def criterion(number, name):
    outcome = {"ok": False}
    try:
        yield outcome
        outcome["ok"] = True
    finally:
        status = "PASS" if outcome["ok"] else "FAIL"
        print(f"[criterion {number:2d}] {status} - {name}")


def test_criterion_1_sandwich_bound():
    with criterion(1, "sandwich bound over 10^4 random pairs, runtime < 5 s"):
        started = time.perf_counter()
        rng = np.random.default_rng(101)
        pairs = 0
        for temperature in (1.0, 0.1, 0.01):
            for _ in range(120):
                n_terms = int(rng.integers(1, 21))
                dim = int(rng.integers(1, 5))
                model = LseModel(
                    temperature,
                    rng.standard_normal((n_terms, dim)),
                    rng.standard_normal(n_terms),
                )
                skeleton = MaxAffineModel(model.exponents, model.offsets)
                points = rng.uniform(-3, 3, (30, dim))
                gap = lse_value(model, points) - max_affine_value(skeleton, points)
                assert gap.min() >= -1e-9
                assert gap.max() <= temperature * math.log(n_terms) + 1e-9
                pairs += points.shape[0]
        elapsed = time.perf_counter() - started
        assert pairs >= 10_000
        assert elapsed < 5.0


def test_criterion_2_scaling_identity():
    with criterion(2, "temperature scaling identity to 1e-12 on 10^3 cases"):
        from lsefit import rescale_to_unit_temperature

        rng = np.random.default_rng(102)
        worst = 0.0
        for _ in range(1000):
            dim = int(rng.integers(1, 4))
            n_terms = int(rng.integers(1, 9))
            model = LseModel(
                float(rng.uniform(0.01, 10.0)),
                rng.standard_normal((n_terms, dim)),
                rng.standard_normal(n_terms),
            )
            unit, scale = rescale_to_unit_temperature(model)
            point = rng.uniform(-2, 2, dim)
            direct = lse_value(model, point)
            routed = scale * lse_value(unit, point / scale)
            worst = max(worst, float(rel_dev(direct, routed)))
        assert worst <= 1e-12


def test_criterion_3_temperature_reduction():
    with criterion(3, "temperature reduction: exact term counts, values to 1e-8"):
        from lsefit import reduce_temperature

        rng = np.random.default_rng(103)
        for n_terms in (2, 3):
            for power in (2, 3):
                model = LseModel(
                    0.9,
                    rng.standard_normal((n_terms, 2)),
                    rng.standard_normal(n_terms),
                )
                reduced = reduce_temperature(model, power)
                assert reduced.n_terms == math.comb(n_terms + power - 1, power)
                points = rng.uniform(-2, 2, (100, 2))
                deviation = rel_dev(lse_value(reduced, points), lse_value(model, points))
                assert float(np.max(deviation)) <= 1e-8


def test_criterion_4_calculus():
    with criterion(4, "analytic calculus vs finite differences; Hessian PSD/PD"):
        rng = np.random.default_rng(104)
        h_grad, h_hess = 1e-5, 1e-4
        for _ in range(200):
            dim = int(rng.integers(1, 4))
            n_terms = int(rng.integers(1, 7))
            model = LseModel(
                float(rng.uniform(0.3, 2.0)),
                rng.standard_normal((n_terms, dim)),
                rng.standard_normal(n_terms),
            )
            x = rng.uniform(-1, 1, dim)

            grad = lse_gradient(model, x)
            fd_grad = np.empty(dim)
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = h_grad
                fd_grad[i] = (lse_value(model, x + e) - lse_value(model, x - e)) / (2 * h_grad)
            assert np.linalg.norm(grad - fd_grad) <= 1e-6 * max(1.0, np.linalg.norm(fd_grad))

            hess = lse_hessian(model, x)
            fd_hess = np.empty((dim, dim))
            for i in range(dim):
                for j in range(dim):
                    ei = np.zeros(dim)
                    ej = np.zeros(dim)
                    ei[i] = h_hess
                    ej[j] = h_hess
                    fd_hess[i, j] = (
                        lse_value(model, x + ei + ej)
                        - lse_value(model, x + ei - ej)
                        - lse_value(model, x - ei + ej)
                        + lse_value(model, x - ei - ej)
                    ) / (4 * h_hess * h_hess)
            assert np.linalg.norm(hess - fd_hess) <= 1e-4 * max(1.0, np.linalg.norm(fd_hess))

            eigenvalues = np.linalg.eigvalsh(hess)
            assert eigenvalues.min() >= -1e-12  # PSD always
            if n_terms >= dim + 1:  # Gaussian rows are affinely generating a.s.
                assert eigenvalues.min() > 1e-12


def test_criterion_5_conjugation():
    with criterion(5, "posynomial conjugation round trip to 1e-10 on 10^3 points"):
        rng = np.random.default_rng(105)
        checked = 0
        while checked < 1000:
            dim = int(rng.integers(1, 4))
            n_terms = int(rng.integers(1, 8))
            model = LseModel(
                float(rng.uniform(0.05, 3.0)),
                rng.standard_normal((n_terms, dim)),
                rng.standard_normal(n_terms),
            )
            gpos = lse_to_gpos(model)
            points = rng.uniform(0.1, 4.0, (10, dim))
            ratio = gpos_value(gpos, points) / np.exp(lse_value(model, np.log(points)))
            assert float(np.abs(ratio - 1.0).max()) <= 1e-10
            back = gpos_to_lse(gpos)
            assert float(np.max(rel_dev(back.offsets, model.offsets))) <= 1e-12
            assert np.array_equal(back.exponents, model.exponents)
            checked += points.shape[0]


def test_criterion_6_fit_quality():
    with criterion(6, "fit quality on synthetic design analogs, < 60 s each"):
        started = time.perf_counter()
        data = generate_dataset(
            GeneratorSpec(family="max-affine", dim=5, n_terms=5, seed=11), 250
        )
        config = FitConfig(n_terms=10, temperature=0.01, restarts=10, seed=0)
        _, report = fit_lse(data, config)
        bound = 0.01 * math.log(10) + 1e-2
        assert report.metrics.mean_abs_err <= bound
        elapsed_lse = time.perf_counter() - started
        assert elapsed_lse < 60.0

        started = time.perf_counter()
        rng = np.random.default_rng(5)
        inputs = rng.uniform(0.5, 2.0, (200, 2))
        targets = inputs[:, 0] * inputs[:, 1] + np.sqrt(inputs[:, 0])
        posy_data = Dataset(inputs, targets, "loglog")
        posy_config = FitConfig(n_terms=3, temperature=0.01, restarts=10, seed=0)
        _, posy_report = fit_gpos(posy_data, posy_config)
        assert posy_report.metrics.mean_rel_err <= 0.02
        elapsed_gpos = time.perf_counter() - started
        assert elapsed_gpos < 60.0


def test_criterion_7_three_aligned_points():
    with criterion(7, "no exact fit through three aligned points"):
        data = Dataset([[-1.0], [0.0], [1.0], [2.0]], [0.0, 0.0, 0.0, 1.0])
        for n_terms, temperature in ((2, 0.5), (3, 0.2), (2, 1.0)):
            config = FitConfig(
                n_terms=n_terms, temperature=temperature, restarts=4,
                max_iter=3000, seed=0,
            )
            model, _ = fit_lse(data, config)
            assert not np.allclose(model.exponents, model.exponents[0])
            midpoint = lse_value(model, [0.0])
            average = (lse_value(model, [-1.0]) + lse_value(model, [1.0])) / 2.0
            assert midpoint < average
            residual = max(abs(lse_value(model, [x])) for x in (-1.0, 0.0, 1.0))
            assert residual > 1e-12


def test_criterion_8_optimization_vs_grid_oracles():
    with criterion(8, "solvers match exhaustive grids on 50 fitted models, < 30 s"):
        started = time.perf_counter()
        rng = np.random.default_rng(108)
        light = dict(restarts=2, max_iter=300)

        for index in range(25):
            dim = 2 + index % 2
            seed = int(rng.integers(0, 2**31))
            data = generate_dataset(
                GeneratorSpec(family="lse", dim=dim, n_terms=4, seed=seed), 80
            )
            config = FitConfig(n_terms=3, temperature=0.5, seed=seed, **light)
            model, _ = fit_lse(data, config)
            box = BoxConstraints(np.full(dim, -1.0), np.full(dim, 1.0))
            report = minimize_lse_box(model, box)
            assert box.contains(report.minimizer)
            _, grid_best = grid_minimize(
                lambda pts: lse_value(model, pts), box.lower, box.upper, 101
            )
            lipschitz = float(np.linalg.norm(model.exponents, axis=1).max())
            cell = float(np.linalg.norm((box.upper - box.lower) / 100.0))
            assert report.objective <= grid_best + 1e-6
            assert grid_best - report.objective <= lipschitz * cell + 1e-9

        for index in range(25):
            seed = int(rng.integers(0, 2**31))
            data = generate_dataset(
                GeneratorSpec(family="posynomial", dim=2, n_terms=3, seed=seed), 80
            )
            config = FitConfig(n_terms=3, temperature=0.5, seed=seed, **light)
            model, _ = fit_gpos(data, config)
            box = BoxConstraints([0.5, 0.5], [2.0, 2.0])
            report = solve_gp_box(model, box)
            assert box.contains(report.minimizer)
            conjugate = gpos_to_lse(model)
            log_lower, log_upper = np.log(box.lower), np.log(box.upper)
            _, grid_best = grid_minimize(
                lambda pts: lse_value(conjugate, pts), log_lower, log_upper, 101
            )
            log_objective = math.log(report.objective)
            lipschitz = float(np.linalg.norm(model.exponents, axis=1).max())
            cell = float(np.linalg.norm((log_upper - log_lower) / 100.0))
            assert log_objective <= grid_best + 1e-6
            assert grid_best - log_objective <= lipschitz * cell + 1e-9

        elapsed = time.perf_counter() - started
        assert elapsed < 30.0


def test_criterion_9_subgradient_approximator_schedule():
    with criterion(9, "supporting-hyperplane approximator: minorant + shrinking error"):
        eps = 0.02
        probes = grid_points([0.0, 0.0], [1.0, 1.0], 161)
        families = {
            "quadratic": (lambda P: (P * P).sum(-1), lambda P: 2.0 * P),
            "norm": (
                lambda P: np.linalg.norm(P, axis=-1),
                lambda P: np.divide(
                    P,
                    np.linalg.norm(P, axis=-1, keepdims=True),
                    out=np.zeros_like(P),
                    where=np.linalg.norm(P, axis=-1, keepdims=True) > 0,
                ),
            ),
        }
        for name, (func, subgrad) in families.items():
            errors = []
            for side in (3, 5, 9, 17):
                samples = grid_points([0.0, 0.0], [1.0, 1.0], side)
                count = side * side
                temperature = eps / (2.0 * math.log(count))
                model = build_subgradient_approximator(
                    samples, func(samples), subgrad(samples), temperature
                )
                skeleton = max_affine_stage(model)
                minorant_slack = float(
                    (max_affine_value(skeleton, probes) - func(probes)).max()
                )
                assert minorant_slack <= 1e-12, name
                errors.append(float(np.abs(lse_value(model, probes) - func(probes)).max()))
            assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:])), name


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, "identical seeds give byte-identical CLI artifacts"):
        captured = []
        for run in ("first", "second"):
            base = tmp_path / run
            base.mkdir()
            data = base / "data.csv"
            model = base / "model.json"
            report = base / "report.json"
            metrics = base / "metrics.json"
            preds = base / "preds.csv"
            solve = base / "solve.json"
            for argv in (
                ["gen", "--family", "max-affine", "--dim", "2", "--terms", "3",
                 "--noise", "0.02", "--seed", "42", "--count", "120",
                 "--output", str(data)],
                ["fit", "--data", str(data), "--terms", "4", "--temperature",
                 "0.1", "--restarts", "3", "--max-iter", "500", "--seed", "9",
                 "--model-out", str(model), "--report-out", str(report)],
                ["metrics", "--model", str(model), "--data", str(data),
                 "--output", str(metrics)],
                ["predict", "--model", str(model), "--data", str(data),
                 "--output", str(preds)],
                ["optimize", "--model", str(model), "--box-lower", "-1",
                 "--box-upper", "1", "--output", str(solve)],
            ):
                assert cli_main(argv) == EXIT_OK
            captured.append(
                [p.read_bytes() for p in (data, model, report, metrics, preds, solve)]
            )
        assert captured[0] == captured[1]
