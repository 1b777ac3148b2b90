"""Datasets and the CSV layout used by the fitting tools.

CSV files carry a header row with input columns ``x1..xn`` and target column
``y`` for data in the plain (convex) space, or ``z1..zn`` and ``w`` for data
in the positive (log-log) space.  Values use ``.`` as the decimal separator
and are written with full float precision.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import SchemaError
from .validation import as_float_matrix, as_float_vector

CONVEX = "convex"
LOGLOG = "loglog"
_SPACES = (CONVEX, LOGLOG)


@dataclass(frozen=True)
class Dataset:
    """Sample inputs (m x n) with scalar targets (m,) in a declared space.

    ``space == "loglog"`` marks strictly positive data meant for posynomial
    modeling; such data is fitted after an entry-wise log transform.
    """

    inputs: np.ndarray
    targets: np.ndarray
    space: str = CONVEX

    def __post_init__(self):
        inputs = as_float_matrix(self.inputs, "inputs")
        targets = as_float_vector(self.targets, "targets")
        if inputs.shape[0] != targets.shape[0]:
            raise ValueError(
                f"inputs have {inputs.shape[0]} rows but targets have {targets.shape[0]}"
            )
        if self.space not in _SPACES:
            raise ValueError(f"space must be one of {_SPACES}, got {self.space!r}")
        if self.space == LOGLOG:
            bad_rows = np.nonzero((inputs <= 0.0).any(axis=1) | (targets <= 0.0))[0]
            if bad_rows.size:
                raise ValueError(
                    f"log-log data must be strictly positive; row {bad_rows[0]} is not"
                )
        inputs = inputs.copy()
        targets = targets.copy()
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.inputs.shape[1]

    def log_transformed(self) -> "Dataset":
        """Entry-wise log of a log-log dataset, yielding convex-space data."""
        if self.space != LOGLOG:
            raise ValueError("log_transformed applies to log-log data only")
        return Dataset(np.log(self.inputs), np.log(self.targets), CONVEX)


def _headers(space: str, n_inputs: int) -> list[str]:
    if space == LOGLOG:
        return [f"z{i + 1}" for i in range(n_inputs)] + ["w"]
    return [f"x{i + 1}" for i in range(n_inputs)] + ["y"]


def write_dataset_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_headers(data.space, data.n_inputs))
        for row, target in zip(data.inputs, data.targets):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])


def _space_from_header(header: list[str], path) -> str:
    if len(header) < 2:
        raise SchemaError(f"{path}: header must name at least one input column and the target")
    prefix = None
    for i, name in enumerate(header[:-1]):
        match = re.fullmatch(r"([xz])(\d+)", name.strip())
        if not match or int(match.group(2)) != i + 1:
            raise SchemaError(
                f"{path}: header column {i + 1} is {name!r}, expected "
                f"'x{i + 1}' or 'z{i + 1}'"
            )
        if prefix is None:
            prefix = match.group(1)
        elif match.group(1) != prefix:
            raise SchemaError(f"{path}: header mixes 'x' and 'z' input columns")
    target = header[-1].strip()
    if prefix == "x" and target == "y":
        return CONVEX
    if prefix == "z" and target == "w":
        return LOGLOG
    raise SchemaError(
        f"{path}: target column {target!r} does not match input prefix {prefix!r} "
        "(expected x1..xn,y or z1..zn,w)"
    )


def read_dataset_csv(path, space: str | None = None) -> Dataset:
    """Read a dataset, inferring its space from the header.

    Passing ``space`` asserts the expectation; a mismatch is a schema error.
    """
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        inferred = _space_from_header(header, path)
        if space is not None and space != inferred:
            raise SchemaError(
                f"{path}: header implies {inferred!r} data but {space!r} was requested"
            )
        n_cols = len(header)
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_cols:
                raise SchemaError(
                    f"{path}: row {line_no} has {len(row)} fields, expected {n_cols}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                bad = next(c for c in row if not _is_number(c))
                raise SchemaError(
                    f"{path}: row {line_no}: could not parse {bad!r} as a number"
                ) from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=float)
    try:
        return Dataset(table[:, :-1], table[:, -1], inferred)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True
