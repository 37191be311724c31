import csv
from dataclasses import dataclass
from typing import IO, Sequence, Tuple

import numpy as np

from src.api_types import DataError, DimensionError

DATASET_HEADER = ("theta1", "theta2", "x", "y")
BOX_HEADER = ("center_x", "center_y", "rad_x", "rad_y")


def format_float(v: float) -> str:
    return f"{float(v):.17g}"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Point samples: inputs U (N×n0) and targets Y (N×n2)."""

    U: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        U = np.array(self.U, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if U.ndim != 2 or Y.ndim != 2:
            raise DimensionError("Dataset arrays", "2-D", (U.shape, Y.shape))
        if U.shape[0] != Y.shape[0]:
            raise DimensionError("Dataset rows", U.shape[0], Y.shape[0])
        if not (np.all(np.isfinite(U)) and np.all(np.isfinite(Y))):
            raise DataError("Dataset has non-finite entries")
        U.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "Y", Y)

    def __len__(self) -> int:
        return self.U.shape[0]


def write_table(stream: IO[str], header: Sequence[str], rows: np.ndarray) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in np.atleast_2d(rows):
        writer.writerow([format_float(v) for v in row])


def read_table(stream: IO[str], header: Sequence[str], what: str) -> np.ndarray:
    reader = csv.reader(stream)
    try:
        first = next(reader)
    except StopIteration:
        raise DataError(f"{what} is empty")
    if tuple(h.strip() for h in first) != tuple(header):
        raise DataError(f"{what} header must be '{','.join(header)}'", found=",".join(first))
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{what} line {line_no}: expected {len(header)} fields, got {len(row)}")
        try:
            rows.append([float(v) for v in row])
        except ValueError:
            raise DataError(f"{what} line {line_no}: non-numeric field")
    table = np.array(rows, dtype=float).reshape(-1, len(header))
    if not np.all(np.isfinite(table)):
        raise DataError(f"{what} has non-finite entries")
    return table


def write_dataset(stream: IO[str], data: Dataset) -> None:
    if data.U.shape[1] != 2 or data.Y.shape[1] != 2:
        raise DimensionError("dataset CSV columns", (2, 2), (data.U.shape[1], data.Y.shape[1]))
    write_table(stream, DATASET_HEADER, np.hstack([data.U, data.Y]))


def read_dataset(stream: IO[str]) -> Dataset:
    table = read_table(stream, DATASET_HEADER, "dataset CSV")
    if table.shape[0] == 0:
        raise DataError("dataset CSV has no samples")
    return Dataset(table[:, :2], table[:, 2:])


def read_column_deltas(stream: IO[str], n0: int) -> np.ndarray:
    """Per-column perturbation radii: one line of n0 comma-separated values."""
    values = [v.strip() for line in stream for v in line.split(",") if v.strip()]
    try:
        deltas = np.array([float(v) for v in values])
    except ValueError:
        raise DataError("delta file has a non-numeric value")
    if deltas.shape[0] != n0:
        raise DimensionError("delta file entries", n0, deltas.shape[0])
    if np.any(deltas < 0) or not np.all(np.isfinite(deltas)):
        raise DataError("delta file values must be finite and nonnegative")
    return deltas


def write_boxes(stream: IO[str], centers: np.ndarray, radii: np.ndarray) -> None:
    write_table(stream, BOX_HEADER, np.hstack([centers, radii]))


def read_boxes(stream: IO[str]) -> Tuple[np.ndarray, np.ndarray]:
    table = read_table(stream, BOX_HEADER, "box CSV")
    return table[:, :2], table[:, 2:]
