"""One-shot closed-form fitting of a pairwise network per partition cell.

For each cell the quadratic objective Q = 1/2 * sum (y - phi . p)^2 over
the cell's rows is minimized by solving its normal equations: the Gram
matrix G = sum phi phi^T and moment vector r = sum phi y are accumulated
in one streaming pass over the rows (bounded memory regardless of data
size) and handed to the Cholesky solver. Cells with fewer than 2^(n+1)
rows cannot determine the parameters; depending on policy they either
raise or fall back to a constant predictor at the target mean.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .activation import ActivationKind, LINEAR
from .datasets import Dataset
from .linsolve import DenseSystem, solve_spd
from .model import LocalPairNet, PairNetModel, feature_matrix, forward
from .partition import Interval, Partition, route

__all__ = [
    "FitConfig",
    "SubspaceFit",
    "FitReport",
    "InsufficientDataError",
    "SubspaceFitError",
    "fit_local",
    "fit",
    "objective",
    "mse",
    "min_rows_threshold",
    "resolve_threads",
]

_BLOCK_ROWS = 4096


class InsufficientDataError(ValueError):
    """A cell had fewer rows than the 2^(n+1) parameter count."""


class SubspaceFitError(RuntimeError):
    """A per-cell failure, annotated with the cell's flat index."""


def min_rows_threshold(n: int) -> int:
    """Minimum rows a cell needs to determine its 2^(n+1) parameters."""
    return 2 ** (n + 1)


@dataclass(frozen=True)
class FitConfig:
    """How to fit: fusion weights, activation, regularization, policies.

    ridge=None uses the solver's auto floor; 0.0 requests the plain
    normal equations (the solver still escalates if they are singular,
    which for this model family they typically are).
    activation_scope chooses what the Layer-1 activations normalize
    over: each cell ("subspace", the default) or the whole partition
    domain ("domain", which makes refinements exactly nested).
    """

    alphas: Sequence[float]
    activation: ActivationKind = LINEAR
    ridge: float | None = None
    min_rows_policy: str = "fallback_mean"
    activation_scope: str = "subspace"

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.min_rows_policy not in ("fallback_mean", "error"):
            raise ValueError(f"unknown min_rows_policy {self.min_rows_policy!r}")
        if self.activation_scope not in ("subspace", "domain"):
            raise ValueError(f"unknown activation_scope {self.activation_scope!r}")
        if self.ridge is not None and self.ridge < 0:
            raise ValueError(f"ridge must be nonnegative, got {self.ridge}")


@dataclass(frozen=True)
class SubspaceFit:
    """Per-cell solve record."""

    index: int
    n_rows: int
    sse: float
    fallback: bool
    ridge: float | None
    escalations: int
    residual: float | None

    @property
    def mse(self) -> float:
        return self.sse / self.n_rows if self.n_rows else 0.0


@dataclass(frozen=True)
class FitReport:
    """Fit diagnostics: one record per cell plus global training error."""

    subspaces: tuple[SubspaceFit, ...]
    train_mse: float
    fit_seconds: float

    @property
    def n_rows(self) -> int:
        return sum(s.n_rows for s in self.subspaces)

    def to_csv(self, path) -> None:
        import csv
        import io

        from .ioutil import atomic_write_text

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["subspace", "n_rows", "sse", "mse", "fallback", "ridge", "escalations", "residual"]
        )
        for s in self.subspaces:
            writer.writerow(
                [s.index, s.n_rows, repr(s.sse), repr(s.mse), int(s.fallback),
                 "" if s.ridge is None else repr(s.ridge), s.escalations,
                 "" if s.residual is None else repr(s.residual)]
            )
        atomic_write_text(path, buf.getvalue())


def _fit_cell(X, y, subspace, config, index=0):
    n = X.shape[1]
    threshold = min_rows_threshold(n)
    alphas = np.asarray(config.alphas, dtype=np.float64)
    probe = LocalPairNet(
        n=n, alphas=alphas, c=np.zeros(2**n), gamma=np.zeros(2**n),
        subspace=tuple(subspace), activation=config.activation,
    )
    if len(y) < threshold:
        if config.min_rows_policy == "error":
            raise InsufficientDataError(
                f"{len(y)} rows < {threshold} parameters (2^(n+1) with n={n})"
            )
        mean = float(np.mean(y)) if len(y) else 0.0
        local = replace(probe, fallback_mean=mean)
        sse = float(np.sum((y - mean) ** 2)) if len(y) else 0.0
        return local, SubspaceFit(index, len(y), sse, True, None, 0, None)

    d = 2 ** (n + 1)
    G = np.zeros((d, d))
    r = np.zeros(d)
    for start in range(0, len(y), _BLOCK_ROWS):
        phi = feature_matrix(probe, X[start:start + _BLOCK_ROWS])
        G += phi.T @ phi
        r += phi.T @ y[start:start + _BLOCK_ROWS]
    p, diag = solve_spd(DenseSystem(G, r), config.ridge)
    local = replace(probe, c=p[:2**n], gamma=p[2**n:])

    sse = 0.0
    for start in range(0, len(y), _BLOCK_ROWS):
        pred = feature_matrix(local, X[start:start + _BLOCK_ROWS]) @ p
        sse += float(np.sum((y[start:start + _BLOCK_ROWS] - pred) ** 2))
    return local, SubspaceFit(index, len(y), sse, False, diag.ridge, diag.escalations,
                              diag.residual)


def fit_local(rows, targets, subspace: Sequence[Interval], config: FitConfig) -> LocalPairNet:
    """Fit one cell's network on rows already routed to that cell."""
    X = np.asarray(rows, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"rows {X.shape} and targets {y.shape} do not line up")
    local, _ = _fit_cell(X, y, subspace, config)
    return local


def resolve_threads(explicit: int | None = None) -> int:
    """Worker count: explicit argument, else PAIRNET_THREADS (0 = auto)."""
    if explicit is None:
        explicit = int(os.environ.get("PAIRNET_THREADS", "1"))
    if explicit == 0:
        return os.cpu_count() or 1
    if explicit < 0:
        raise ValueError(f"thread count must be >= 0, got {explicit}")
    return explicit


def fit(dataset: Dataset, partition: Partition, config: FitConfig,
        threads: int | None = None):
    """Fit one local network per cell; one pass over the data per cell.

    Rows are routed to cells, each cell is fit independently (in
    parallel when threads allow; results are assembled in flat-index
    order so the model is identical either way), and the model plus a
    per-cell report are returned. Wall-clock time covers routing and
    fitting only.

    Returns (PairNetModel, FitReport).
    """
    if len(dataset) == 0:
        raise ValueError("cannot fit an empty dataset")
    if dataset.n != partition.ndim:
        raise ValueError(f"dataset has {dataset.n} dims, partition has {partition.ndim}")
    if len(config.alphas) != dataset.n:
        raise ValueError(f"{len(config.alphas)} alphas for {dataset.n} inputs")
    workers = resolve_threads(threads)

    t0 = time.perf_counter()
    groups = route(partition, dataset)

    def one(j):
        box = partition.cell(j) if config.activation_scope == "subspace" else partition.domain
        idx = groups[j]
        try:
            return _fit_cell(dataset.X[idx], dataset.y[idx], box, config, index=j)
        except Exception as exc:
            raise SubspaceFitError(f"subspace {j} {partition.decode(j)}: {exc}") from exc

    if workers > 1 and partition.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(partition.size)))
    else:
        results = [one(j) for j in range(partition.size)]
    elapsed = time.perf_counter() - t0

    locals_ = tuple(res[0] for res in results)
    cells = tuple(res[1] for res in results)
    model = PairNetModel(
        partition=partition, locals=locals_, activation_scope=config.activation_scope,
        # Only the recipe goes in: provenance is serialized with the model,
        # and equal-seed runs must produce byte-identical files, so wall
        # clock stays on the report.
        provenance={
            "alphas": list(config.alphas),
            "activation": config.activation.tag,
            "activation_scope": config.activation_scope,
        },
    )
    # Recompute the training MSE through the same single-pass path that
    # evaluation uses, so a later eval on the training data reproduces
    # this number bitwise (the per-cell sse's sum to it only up to
    # summation-order dust).
    report = FitReport(subspaces=cells, train_mse=mse(model, dataset), fit_seconds=elapsed)
    return model, report


def objective(model: PairNetModel, dataset: Dataset) -> float:
    """Half the sum of squared residuals over the dataset (MSE = 2Q/N)."""
    if len(dataset) == 0:
        raise ValueError("objective of an empty dataset is undefined")
    if dataset.n != model.n:
        raise ValueError(f"dataset has {dataset.n} dims, model has {model.n}")
    resid = dataset.y - forward(model, dataset.X)
    return 0.5 * float(np.sum(resid**2))


def mse(model: PairNetModel, dataset: Dataset) -> float:
    """Mean squared prediction error over the dataset."""
    return 2.0 * objective(model, dataset) / len(dataset)
