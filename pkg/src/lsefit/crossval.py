"""Cross-validation over term count and temperature."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import LOGLOG, Dataset
from .fitting import FitConfig, fit_dataset, predictions


@dataclass(frozen=True)
class CvCell:
    n_terms: int
    temperature: float
    mean_abs_err: float
    mean_rel_err: float
    n_undefined_rel: int = 0

    def to_dict(self) -> dict:
        return {
            "n_terms": self.n_terms,
            "temperature": self.temperature,
            "mean_abs_err": self.mean_abs_err,
            "mean_rel_err": self.mean_rel_err,
            "n_undefined_rel": self.n_undefined_rel,
        }


@dataclass(frozen=True)
class CvResult:
    cells: list[CvCell]
    best_terms: int
    best_temperature: float
    criterion: str

    def to_dict(self) -> dict:
        return {
            "cells": [cell.to_dict() for cell in self.cells],
            "best_terms": self.best_terms,
            "best_temperature": self.best_temperature,
            "criterion": self.criterion,
        }


def select_best(cells: list[CvCell], space: str) -> tuple[int, float]:
    """Pick the cell with the smallest validation error.

    Convex-space data is scored by mean absolute error, log-log data by mean
    relative error.  Exact ties prefer the larger temperature (smoother
    model), then the smaller term count (simpler model).
    """
    if not cells:
        raise ValueError("no cross-validation cells to select from")

    def error(cell: CvCell) -> float:
        return cell.mean_rel_err if space == LOGLOG else cell.mean_abs_err

    best = min(cells, key=lambda c: (error(c), -c.temperature, c.n_terms))
    return best.n_terms, best.temperature


def _fold_ids(n_samples: int, folds: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x0F]))
    ids = np.empty(n_samples, dtype=int)
    ids[rng.permutation(n_samples)] = np.arange(n_samples) % folds
    return ids


def cross_validate(
    data: Dataset,
    terms_grid: list[int],
    temperature_grid: list[float],
    folds: int = 5,
    seed: int = 0,
    base_config: FitConfig | None = None,
) -> CvResult:
    """Score every (n_terms, temperature) cell by K-fold validation error.

    Fold assignment is a deterministic function of the seed, and each
    (cell, fold) training run gets its own derived seed, so repeated calls
    produce identical tables.  Validation predictions are pooled across folds
    before averaging.
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if not terms_grid or not temperature_grid:
        raise ValueError("terms_grid and temperature_grid must be non-empty")
    if data.n_samples < folds:
        raise ValueError(
            f"{folds}-fold split of {data.n_samples} samples leaves an empty fold"
        )
    base = base_config if base_config is not None else FitConfig()
    fold_ids = _fold_ids(data.n_samples, folds, seed)

    cells = []
    for cell_index, n_terms in enumerate(terms_grid):
        for temp_index, temperature in enumerate(temperature_grid):
            abs_errs = []
            rel_errs = []
            n_undefined = 0
            for fold in range(folds):
                train = fold_ids != fold
                val = ~train
                cell_seed = int(
                    np.random.SeedSequence(
                        [seed, cell_index, temp_index, fold]
                    ).generate_state(1)[0]
                )
                config = replace(
                    base, n_terms=n_terms, temperature=temperature, seed=cell_seed
                )
                train_data = Dataset(
                    data.inputs[train], data.targets[train], data.space
                )
                model, _ = fit_dataset(train_data, config)
                val_data = Dataset(data.inputs[val], data.targets[val], data.space)
                preds = predictions(model, val_data)
                abs_err = np.abs(preds - val_data.targets)
                denom = np.minimum(np.abs(preds), np.abs(val_data.targets))
                defined = denom > 0.0
                abs_errs.append(abs_err)
                rel_errs.append(abs_err[defined] / denom[defined])
                n_undefined += int(np.count_nonzero(~defined))
            abs_all = np.concatenate(abs_errs)
            rel_all = np.concatenate(rel_errs)
            cells.append(
                CvCell(
                    n_terms=n_terms,
                    temperature=float(temperature),
                    mean_abs_err=float(abs_all.mean()),
                    mean_rel_err=float(rel_all.mean()) if rel_all.size else 0.0,
                    n_undefined_rel=n_undefined,
                )
            )

    best_terms, best_temperature = select_best(cells, data.space)
    criterion = "mean_rel_err" if data.space == LOGLOG else "mean_abs_err"
    return CvResult(cells, best_terms, best_temperature, criterion)
