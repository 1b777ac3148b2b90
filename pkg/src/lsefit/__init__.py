"""Convex and log-log-convex surrogate modeling with log-sum-exp models.

The package fits smooth convex models (and their posynomial conjugates) to
data, and solves box-constrained design problems over the fitted models.
"""

from .config import DEFAULTS, Defaults
from .data import CONVEX, LOGLOG, Dataset, read_dataset_csv, write_dataset_csv
from .estimators import GposRegressor, LseRegressor, MaxAffineRegressor
from .exceptions import CapacityError, SchemaError
from .fitting import (
    FitConfig,
    FitReport,
    Metrics,
    compute_metrics,
    fit_gpos,
    fit_lse,
    fit_max_affine,
    init_lse_from_max_affine,
    predictions,
)
from .crossval import CvCell, CvResult, cross_validate, select_best
from .models import (
    GposModel,
    LseModel,
    MaxAffineModel,
    evaluate,
    gpos_to_lse,
    gpos_value,
    load_model,
    lse_gradient,
    lse_hessian,
    lse_to_gpos,
    lse_value,
    max_affine_value,
    model_from_dict,
    model_to_dict,
    reduce_temperature,
    rescale_to_unit_temperature,
    save_model,
)
from .optimize import (
    BoxConstraints,
    SolveReport,
    maximize_via_reciprocal,
    minimize_lse_box,
    solve_gp_box,
)
from .synth import (
    Generator,
    GeneratorSpec,
    build_subgradient_approximator,
    generate_dataset,
    grid_minimize,
    grid_points,
    max_affine_stage,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULTS",
    "Defaults",
    "CONVEX",
    "LOGLOG",
    "Dataset",
    "read_dataset_csv",
    "write_dataset_csv",
    "GposRegressor",
    "LseRegressor",
    "MaxAffineRegressor",
    "CapacityError",
    "SchemaError",
    "FitConfig",
    "FitReport",
    "Metrics",
    "compute_metrics",
    "fit_gpos",
    "fit_lse",
    "fit_max_affine",
    "init_lse_from_max_affine",
    "predictions",
    "CvCell",
    "CvResult",
    "cross_validate",
    "select_best",
    "GposModel",
    "LseModel",
    "MaxAffineModel",
    "evaluate",
    "gpos_to_lse",
    "gpos_value",
    "load_model",
    "lse_gradient",
    "lse_hessian",
    "lse_to_gpos",
    "lse_value",
    "max_affine_value",
    "model_from_dict",
    "model_to_dict",
    "reduce_temperature",
    "rescale_to_unit_temperature",
    "save_model",
    "BoxConstraints",
    "SolveReport",
    "maximize_via_reciprocal",
    "minimize_lse_box",
    "solve_gp_box",
    "Generator",
    "GeneratorSpec",
    "build_subgradient_approximator",
    "generate_dataset",
    "grid_minimize",
    "grid_points",
    "max_affine_stage",
    "__version__",
]
