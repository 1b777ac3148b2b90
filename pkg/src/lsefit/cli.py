"""Command line interface: generate, fit, validate, predict, and optimize.

All randomness flows from the ``--seed`` flags and no artifact embeds wall
clock state, so identical invocations write identical bytes.  On failure a
machine-readable error document is printed to stdout and a category-specific
exit code is returned (see EXIT_*).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .crossval import cross_validate
from .data import CONVEX, LOGLOG, Dataset, read_dataset_csv, write_dataset_csv
from .exceptions import CapacityError, SchemaError
from .fitting import FitConfig, compute_metrics, fit_gpos, fit_lse, fit_max_affine, predictions
from .models import GposModel, LseModel, load_model, save_model
from .optimize import BoxConstraints, maximize_via_reciprocal, minimize_lse_box, solve_gp_box
from .synth import GeneratorSpec, generate_dataset, load_spec, save_spec
from . import bench as bench_module

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_NO_CONVERGENCE = 5

log = logging.getLogger("lsefit")


class UsageError(ValueError):
    """Invalid option values detected before any work starts."""


def _emit_error(kind: str, code: int, message: str, **detail) -> int:
    doc = {"error": {"kind": kind, "code": code, "message": message}}
    if detail:
        doc["error"].update(detail)
    print(json.dumps(doc, indent=2))
    return code


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated list of numbers, got {text!r}")


def _parse_ints(text: str, name: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated list of integers, got {text!r}")


def _parse_box(lower_text: str, upper_text: str, dim: int) -> BoxConstraints:
    lower = _parse_floats(lower_text, "--box-lower")
    upper = _parse_floats(upper_text, "--box-upper")
    if len(lower) == 1:
        lower = lower * dim
    if len(upper) == 1:
        upper = upper * dim
    if len(lower) != dim or len(upper) != dim:
        raise UsageError(
            f"box bounds must have 1 or {dim} entries, got {len(lower)} and {len(upper)}"
        )
    try:
        return BoxConstraints(np.asarray(lower), np.asarray(upper))
    except ValueError as exc:
        raise UsageError(str(exc))


def _fit_config(args) -> FitConfig:
    try:
        return FitConfig(
            n_terms=args.terms,
            temperature=args.temperature,
            restarts=args.restarts,
            max_iter=args.max_iter,
            ridge=args.ridge,
            tol=args.tol,
            seed=args.seed,
            warm_start=not args.no_warm_start,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _add_fit_options(parser) -> None:
    parser.add_argument("--terms", type=int, default=3, help="number of model terms K")
    parser.add_argument("--temperature", type=float, default=1.0, help="smoothing parameter T")
    parser.add_argument("--restarts", type=int, default=5)
    parser.add_argument("--max-iter", type=int, default=2000)
    parser.add_argument("--ridge", type=float, default=0.0)
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-warm-start", action="store_true",
                        help="disable the max-affine warm start of the first restart")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.spec:
        spec = load_spec(args.spec)
    else:
        try:
            spec = GeneratorSpec(
                family=args.family,
                dim=args.dim,
                n_terms=args.terms,
                gen_temperature=args.gen_temperature,
                noise=args.noise,
                lower=args.lower,
                upper=args.upper,
                seed=args.seed,
            )
        except ValueError as exc:
            raise UsageError(str(exc))
    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    data = generate_dataset(spec, args.count)
    write_dataset_csv(data, args.output)
    if args.spec_out:
        save_spec(spec, args.spec_out)
    log.info("wrote %d rows to %s", data.n_samples, args.output)
    return EXIT_OK


def cmd_fit(args) -> int:
    config = _fit_config(args)
    data = read_dataset_csv(args.data, space=args.space)
    started = time.perf_counter()
    if args.model_class == "maxaffine":
        if data.space != CONVEX:
            raise UsageError("max-affine models require convex-space (x/y) data")
        model, report = fit_max_affine(
            data, n_terms=args.terms, seed=args.seed, restarts=args.restarts
        )
    elif data.space == LOGLOG:
        model, report = fit_gpos(data, config)
    else:
        model, report = fit_lse(data, config)
    log.info("fit finished in %.3f s", time.perf_counter() - started)
    save_model(model, args.model_out)
    if args.report_out:
        _write_json(args.report_out, report.to_dict())
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    data = read_dataset_csv(args.data)
    preds = predictions(model, data)
    with open(args.output, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["prediction"])
        for value in preds:
            writer.writerow([repr(float(value))])
    return EXIT_OK


def cmd_metrics(args) -> int:
    model = load_model(args.model)
    data = read_dataset_csv(args.data)
    metrics = compute_metrics(model, data)
    _write_json(args.output, metrics.to_dict())
    return EXIT_OK


def cmd_crossval(args) -> int:
    terms_grid = _parse_ints(args.terms_grid, "--terms-grid")
    temperature_grid = _parse_floats(args.temperature_grid, "--temperature-grid")
    if not terms_grid or not temperature_grid:
        raise UsageError("grids must be non-empty")
    if args.folds < 2:
        raise UsageError(f"--folds must be >= 2, got {args.folds}")
    base = FitConfig(
        restarts=args.restarts,
        max_iter=args.max_iter,
        ridge=args.ridge,
        tol=args.tol,
        warm_start=not args.no_warm_start,
    )
    data = read_dataset_csv(args.data, space=args.space)
    started = time.perf_counter()
    result = cross_validate(
        data,
        terms_grid=terms_grid,
        temperature_grid=temperature_grid,
        folds=args.folds,
        seed=args.seed,
        base_config=base,
    )
    log.info("cross-validation finished in %.3f s", time.perf_counter() - started)
    _write_json(args.table_out, result.to_dict())
    if args.model_out:
        config = FitConfig(
            n_terms=result.best_terms,
            temperature=result.best_temperature,
            restarts=args.restarts,
            max_iter=args.max_iter,
            ridge=args.ridge,
            tol=args.tol,
            seed=args.seed,
            warm_start=not args.no_warm_start,
        )
        if data.space == LOGLOG:
            model, _ = fit_gpos(data, config)
        else:
            model, _ = fit_lse(data, config)
        save_model(model, args.model_out)
    return EXIT_OK


def _run_box_solver(args, expect_kind) -> int:
    model = load_model(args.model)
    if expect_kind == "lse" and not isinstance(model, LseModel):
        raise UsageError(
            "optimize requires an lse model (use gp-optimize for posynomials)"
        )
    if expect_kind == "gpos" and not isinstance(model, GposModel):
        raise UsageError("gp-optimize requires a gpos model")
    box = _parse_box(args.box_lower, args.box_upper, model.n_inputs)
    try:
        if args.reciprocal:
            report = maximize_via_reciprocal(model, box, tol=args.tol, max_iter=args.max_iter)
        elif expect_kind == "gpos":
            report = solve_gp_box(model, box, tol=args.tol, max_iter=args.max_iter)
        else:
            report = minimize_lse_box(model, box, tol=args.tol, max_iter=args.max_iter)
    except ValueError as exc:
        raise UsageError(str(exc))
    _write_json(args.output, report.to_dict())
    print(json.dumps(report.to_dict(), indent=2))
    if not report.converged:
        log.warning("solver stopped before reaching tolerance %g", args.tol)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_optimize(args) -> int:
    return _run_box_solver(args, "lse")


def cmd_gp_optimize(args) -> int:
    return _run_box_solver(args, "gpos")


def cmd_bench(args) -> int:
    results = bench_module.run_bench(seed=args.seed)
    for row in results:
        status = "PASS" if row["passed"] else "FAIL"
        print(f"{status}  {row['name']:<38} {row['detail']}")
    if args.output:
        _write_json(args.output, {"checks": results})
    if all(row["passed"] for row in results):
        return EXIT_OK
    return EXIT_ERROR


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsefit",
        description="Fit convex / log-log-convex surrogate models and optimize over them.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--family", choices=["quadratic", "norm", "max-affine", "lse", "posynomial"],
                   default="quadratic")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--terms", type=int, default=3, help="terms of the generating model")
    p.add_argument("--gen-temperature", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100, help="number of samples")
    p.add_argument("--spec", default=None, help="read the generator spec from JSON")
    p.add_argument("--spec-out", default=None, help="also write the spec as JSON")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit a model to a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--space", choices=[CONVEX, LOGLOG], default=None,
                   help="assert the dataset space (inferred from the header)")
    p.add_argument("--model-class", choices=["auto", "maxaffine"], default="auto",
                   help="'auto' fits lse/gpos by space; 'maxaffine' fits the piecewise model")
    _add_fit_options(p)
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a stored model on dataset inputs")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("metrics", help="prediction-error summary of a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("crossval", help="grid search over terms and temperature")
    p.add_argument("--data", required=True)
    p.add_argument("--space", choices=[CONVEX, LOGLOG], default=None)
    p.add_argument("--terms-grid", required=True, help="comma-separated term counts")
    p.add_argument("--temperature-grid", required=True, help="comma-separated temperatures")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--table-out", required=True)
    p.add_argument("--model-out", default=None,
                   help="refit the selected cell on all data and store the model")
    p.set_defaults(func=cmd_crossval)

    for name, func, help_text in (
        ("optimize", cmd_optimize, "minimize an lse model over a box"),
        ("gp-optimize", cmd_gp_optimize, "minimize a gpos model over a positive box"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True)
        p.add_argument("--box-lower", required=True,
                       help="comma-separated lower bounds (a single value broadcasts)")
        p.add_argument("--box-upper", required=True)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--max-iter", type=int, default=100_000)
        p.add_argument("--reciprocal", action="store_true",
                       help="also report 1/objective (model fitted to a reciprocal target)")
        p.add_argument("--output", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("bench", help="run the scaled-down verification checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        return _emit_error("usage", EXIT_USAGE, str(exc))
    except SchemaError as exc:
        return _emit_error("schema", EXIT_SCHEMA, str(exc))
    except FileNotFoundError as exc:
        return _emit_error("io", EXIT_IO, f"{exc.filename}: file not found")
    except OSError as exc:
        return _emit_error("io", EXIT_IO, str(exc))
    except (CapacityError, OverflowError, ValueError) as exc:
        return _emit_error("schema", EXIT_SCHEMA, str(exc))
    except Exception as exc:  # pragma: no cover - last resort
        log.exception("unexpected failure")
        return _emit_error("internal", EXIT_ERROR, f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
