"""Tabular data ingestion, standardization and second-order statistics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConstantColumn, DataError, DataIOError, DuplicateName, ParseError, TooFewRows


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n x p`` matrix of finite reals, one named column per variable."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float, order="F")
        if values.ndim != 2:
            raise DataError("dataset values must be a 2-d array")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        n, p = values.shape
        if p < 1:
            raise DataError("dataset needs at least one column")
        if n < 2:
            raise TooFewRows(f"need at least 2 rows, got {n}")
        if len(self.names) != p:
            raise DataError(f"{len(self.names)} names for {p} columns")
        if any(not nm for nm in self.names):
            raise DataError("column names must be nonempty")
        dup = _first_duplicate(self.names)
        if dup is not None:
            raise DuplicateName(f"duplicate column name {dup!r}")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset contains non-finite values")

    @classmethod
    def from_array(cls, values, names: Sequence[str] | None = None) -> Dataset:
        values = np.asarray(values, dtype=float)
        if names is None:
            names = [f"X{i}" for i in range(values.shape[1])]
        return cls(values, tuple(names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, key: int | str) -> np.ndarray:
        j = self.names.index(key) if isinstance(key, str) else key
        return self.values[:, j]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.names == other.names
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )


@dataclass(frozen=True)
class SummaryStats:
    means: np.ndarray
    std_devs: np.ndarray
    correlation: np.ndarray


def _first_duplicate(names):
    seen = set()
    for nm in names:
        if nm in seen:
            return nm
        seen.add(nm)
    return None


def load_csv(path: str | Path) -> Dataset:
    """Read a comma-separated file with a header row and numeric cells.

    Parse errors carry a 1-based data-row index (the header is row 0) and a
    1-based column index.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataIOError(f"{path} is not valid UTF-8") from exc
    if not rows:
        raise ParseError(0, 1, "empty file")
    header = [h.strip() for h in rows[0]]
    for c, h in enumerate(header, start=1):
        if not h:
            raise ParseError(0, c, "empty column name")
    dup = _first_duplicate(header)
    if dup is not None:
        raise DuplicateName(f"duplicate column name {dup!r}")
    data = []
    for r, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(r, min(len(row), len(header)) + 1, f"expected {len(header)} fields, got {len(row)}")
        vals = []
        for c, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(r, c, f"non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(r, c, f"non-finite value {cell!r}")
            vals.append(v)
        data.append(vals)
    if len(data) < 2:
        raise TooFewRows(f"need at least 2 data rows, got {len(data)}")
    return Dataset(np.array(data), tuple(header))


def write_csv(d: Dataset, path: str | Path) -> None:
    """Write ``d`` so that :func:`load_csv` reads back identical values."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv_text(d))


def to_csv_text(d: Dataset) -> str:
    lines = [",".join(d.names)]
    lines += [",".join(repr(float(v)) for v in row) for row in d.values]
    return "\n".join(lines) + "\n"


def _column_stats(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    means = d.values.mean(axis=0)
    stds = d.values.std(axis=0)
    return means, stds


def _constant_columns(d: Dataset, means: np.ndarray, stds: np.ndarray) -> list[int]:
    # relative threshold: a constant column can pick up rounding noise around its mean
    tol = 1e-12 * np.maximum(1.0, np.abs(means))
    return [int(j) for j in np.flatnonzero(stds <= tol)]


def standardize(d: Dataset) -> Dataset:
    """Center every column and scale it to unit population variance."""
    means, stds = _column_stats(d)
    bad = _constant_columns(d, means, stds)
    if bad:
        raise ConstantColumn(bad[0], d.names[bad[0]])
    z = (d.values - means) / stds
    # a second pass removes residual rounding in mean and scale
    z = z - z.mean(axis=0)
    z = z / z.std(axis=0)
    return Dataset(z, d.names)


def summary_stats(d: Dataset) -> SummaryStats:
    means, stds = _column_stats(d)
    bad = _constant_columns(d, means, stds)
    if bad:
        raise ConstantColumn(bad[0], d.names[bad[0]])
    z = (d.values - means) / stds
    corr = (z.T @ z) / d.n
    corr = np.clip((corr + corr.T) / 2, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return SummaryStats(means, stds, corr)


def correlation(d: Dataset) -> np.ndarray:
    return summary_stats(d).correlation
