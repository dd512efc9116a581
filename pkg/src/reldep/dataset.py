"""Samples, CSV ingestion, alignment and the half split.

A Sample is an immutable (m, d) float64 matrix with a label.  Loading is
strict: every cell must parse as a finite number, rows must have equal
width, and any violation is reported with its file position.  Missing
values are never imputed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "DatasetError",
    "PreconditionError",
    "Sample",
    "JointSample",
    "load_csv",
    "save_csv",
    "align",
    "split_half",
]


class DatasetError(ValueError):
    """Unreadable, malformed or inconsistent input data."""


class PreconditionError(ValueError):
    """A statistical precondition is violated (too few rows, degenerate data)."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Sample:
    """One variable's observations: rows are observations, columns features."""

    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]  # a vector is m observations of one feature
        if data.ndim != 2:
            raise DatasetError(f"sample {self.label!r}: expected a 2-d matrix")
        object.__setattr__(self, "data", _readonly(data))
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise DatasetError(f"sample {self.label!r}: empty matrix")
        if not np.isfinite(self.data).all():
            i, j = np.argwhere(~np.isfinite(self.data))[0]
            raise DatasetError(
                f"sample {self.label!r}: non-finite value at row {i + 1}, "
                f"column {j + 1}"
            )

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def rows(self, idx) -> "Sample":
        """New sample restricted to the given row indices (order kept)."""
        return Sample(self.data[idx], self.label)


@dataclass(frozen=True)
class JointSample:
    """Row-aligned samples: row i of each variable is the same unit."""

    x: Sample
    y: Sample
    z: Sample | None = None

    def __post_init__(self):
        counts = [self.x.m, self.y.m] + ([self.z.m] if self.z is not None else [])
        if len(set(counts)) != 1:
            joined = ",".join(str(c) for c in counts)
            raise DatasetError(f"sample sizes {joined} differ")

    @property
    def m(self) -> int:
        return self.x.m


def load_csv(
    path,
    *,
    delimiter: str = ",",
    has_header: bool = False,
    column_range: tuple[int, int] | None = None,
    label: str | None = None,
) -> Sample:
    """Load a numeric CSV file into a Sample.

    ``column_range`` is a half-open 0-based ``(start, stop)`` over the file's
    columns; None keeps every column.  Rows must all have the same width and
    every selected cell must be a finite number; errors name the offending
    1-based line and column.
    """
    path = Path(path)
    if len(delimiter) != 1:
        raise DatasetError(f"delimiter must be a single character, got {delimiter!r}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path}: not valid UTF-8 text ({exc})") from exc

    rows: list[list[float]] = []
    width: int | None = None
    reader = csv.reader(text.splitlines(), delimiter=delimiter)
    for lineno, cells in enumerate(reader, start=1):
        if has_header and lineno == 1:
            continue
        if not cells or (len(cells) == 1 and cells[0].strip() == ""):
            continue  # blank line
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DatasetError(
                f"{path}: line {lineno} has {len(cells)} columns, expected {width}"
            )
        if column_range is not None:
            start, stop = column_range
            if not (0 <= start < stop <= len(cells)):
                raise DatasetError(
                    f"{path}: column range {start}:{stop} is empty or out of "
                    f"bounds for {len(cells)} columns"
                )
            cells = cells[start:stop]
        parsed = []
        for colno, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: non-numeric cell {cell!r} at line {lineno}, "
                    f"column {colno}"
                ) from None
            if not np.isfinite(value):
                raise DatasetError(
                    f"{path}: non-finite cell {cell!r} at line {lineno}, "
                    f"column {colno}"
                )
            parsed.append(value)
        rows.append(parsed)

    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return Sample(np.array(rows, dtype=np.float64), label or path.stem)


def save_csv(sample: Sample, path, *, delimiter: str = ",") -> None:
    """Write a sample with exact round-trip precision (shortest repr)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for row in sample.data:
            fh.write(delimiter.join(repr(float(v)) for v in row))
            fh.write("\n")


def align(x: Sample, y: Sample, z: Sample | None = None) -> JointSample:
    """Bundle samples that observe the same units; sizes must match."""
    return JointSample(x=x, y=y, z=z)


def split_half(
    j: JointSample, *, shuffle_seed: int | None = None
) -> tuple[JointSample, JointSample]:
    """Split into two disjoint halves: (x', y') rows and (x'', z'') rows.

    The first half pairs the first floor(m/2) rows of x with the same rows
    of y; the second half pairs the next floor(m/2) rows of x with the same
    rows of z.  An odd final row is dropped.  Row order is deterministic
    unless ``shuffle_seed`` asks for a seeded pre-shuffle.
    """
    if j.z is None:
        raise PreconditionError("split_half needs all three variables x, y, z")
    if j.m < 8:
        raise PreconditionError(
            f"split_half needs m >= 8 so each half supports the estimator; got {j.m}"
        )
    order = np.arange(j.m)
    if shuffle_seed is not None:
        order = np.random.default_rng(np.random.SeedSequence(shuffle_seed)).permutation(
            j.m
        )
    half = j.m // 2
    first, second = order[:half], order[half : 2 * half]
    return (
        JointSample(x=j.x.rows(first), y=j.y.rows(first)),
        JointSample(x=j.x.rows(second), y=j.z.rows(second)),
    )
