"""The three synthetic regression benchmarks and their exact grids.

All three target functions map (x, y, z) with positive coordinates to one
real output:

    f1 = (1 + x^0.5 + y^-1 + z^-1.5)^2
    f2 = x^1.25 * sin(x^0.15 - z^0.05) + y^1.25 + z^0.15
    f3 = (1 + x^0.25 * z + y^0.5 * z^-1 + z^-0.05)^2

The training grid is the 20^3 integer lattice {1..20}^3 enumerated as
x = 1 + floor(k/400), y = 1 + floor(k/20) mod 20, z = 1 + k mod 20 for
k = 0..7999; the test grid is the 19^3 half-integer lattice
{1.5..19.5}^3 enumerated the same way with stride 361/19 for
j = 0..6858. Targets are noise-free. Over the training grid the targets
span [4.248, 55.833], [2.0, 66.023] and [16.0, 1969.527] respectively.

Datasets round-trip through CSV ("x1,...,xn,y" header, shortest
round-trip decimal encoding) without any loss.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .ioutil import atomic_write_text
from .partition import Interval

__all__ = [
    "Dataset",
    "BENCHMARKS",
    "CsvFormatError",
    "benchmark_eval",
    "gen_train",
    "gen_test",
    "read_csv",
    "write_csv",
]

TRAIN_DOMAIN = (Interval(1.0, 20.0), Interval(1.0, 20.0), Interval(1.0, 20.0))


class CsvFormatError(ValueError):
    """Malformed dataset CSV; the message names the offending line."""


@dataclass(frozen=True)
class Dataset:
    """Rows of (x_1..x_n, y) plus the domain box the x's live in."""

    X: np.ndarray
    y: np.ndarray
    domain: tuple[Interval, ...]

    def __post_init__(self):
        object.__setattr__(self, "X", np.asarray(self.X, dtype=np.float64))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64))
        if self.X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError(f"y shape {self.y.shape} does not match {self.X.shape[0]} rows")
        if len(self.domain) != self.X.shape[1]:
            raise ValueError(
                f"domain has {len(self.domain)} intervals for {self.X.shape[1]} columns"
            )

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]


def _f1(x, y, z):
    return (1.0 + x**0.5 + y**-1.0 + z**-1.5) ** 2


def _f2(x, y, z):
    return x**1.25 * np.sin(x**0.15 - z**0.05) + y**1.25 + z**0.15


def _f3(x, y, z):
    return (1.0 + x**0.25 * z + y**0.5 / z + z**-0.05) ** 2


BENCHMARKS = {"f1": _f1, "f2": _f2, "f3": _f3}


def benchmark_eval(tag: str, x, y, z):
    """Evaluate one benchmark function; coordinates must be positive."""
    if tag not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {tag!r}; expected one of {sorted(BENCHMARKS)}")
    x, y, z = (np.asarray(v, dtype=np.float64) for v in (x, y, z))
    if np.any(x <= 0) or np.any(y <= 0) or np.any(z <= 0):
        raise ValueError("benchmark inputs must be positive (negative powers)")
    out = BENCHMARKS[tag](x, y, z)
    return float(out) if out.ndim == 0 else out


def gen_train(tag: str) -> Dataset:
    """The 8000-row training grid for one benchmark."""
    k = np.arange(8000)
    x = 1.0 + k // 400
    y = 1.0 + (k // 20) % 20
    z = 1.0 + k % 20
    return Dataset(np.column_stack([x, y, z]), benchmark_eval(tag, x, y, z), TRAIN_DOMAIN)


def gen_test(tag: str) -> Dataset:
    """The 6859-row test grid; every point is interior to the domain."""
    j = np.arange(6859)
    x = 1.5 + j // 361
    y = 1.5 + (j // 19) % 19
    z = 1.5 + j % 19
    return Dataset(np.column_stack([x, y, z]), benchmark_eval(tag, x, y, z), TRAIN_DOMAIN)


def write_csv(dataset: Dataset, path) -> None:
    """Write a dataset as UTF-8 CSV with exact decimal values."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{i + 1}" for i in range(dataset.n)] + ["y"])
    for row, target in zip(dataset.X, dataset.y):
        writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])
    atomic_write_text(path, buf.getvalue())


def read_csv(path, domain: tuple[Interval, ...] | None = None) -> Dataset:
    """Read a dataset CSV written by write_csv (or compatible).

    The header must be x1,...,xn,y. When no domain is given it is
    inferred from the per-column min/max (degenerate columns are padded
    by half a unit each way).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, expected a header row") from None
        n = len(header) - 1
        expected = [f"x{i + 1}" for i in range(n)] + ["y"]
        if n < 1 or header != expected:
            raise CsvFormatError(
                f"{path}: line 1: bad header {header!r}, expected {expected!r}"
            )
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n + 1:
                raise CsvFormatError(
                    f"{path}: line {lineno}: expected {n + 1} fields, got {len(row)}"
                )
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise CsvFormatError(f"{path}: line {lineno}: {exc}") from None
            xs.append(values[:n])
            ys.append(values[n])
    X = np.asarray(xs, dtype=np.float64).reshape(len(xs), n)
    y = np.asarray(ys, dtype=np.float64)
    if domain is None:
        domain = tuple(_column_interval(X[:, i]) for i in range(n))
    return Dataset(X, y, domain)


def _column_interval(col: np.ndarray) -> Interval:
    if col.size == 0:
        return Interval(0.0, 1.0)
    lo, hi = float(col.min()), float(col.max())
    if lo == hi:
        return Interval(lo - 0.5, hi + 0.5)
    return Interval(lo, hi)
