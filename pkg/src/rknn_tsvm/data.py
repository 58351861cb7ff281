"""Datasets, CSV ingestion, min-max scaling, stratified folds and synthetic generators."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

DEFAULT_LABEL_MAP = {"1": 1, "+1": 1, "1.0": 1, "-1": -1, "-1.0": -1}


class DataFormatError(ValueError):
    """Raised for malformed CSV input (bad arity, unmapped label, non-numeric cell)."""


@dataclass(frozen=True)
class Dataset:
    samples: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    # shape (d, 2): per-feature (min, max) from the data the scaling was fitted on
    norm_params: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.samples, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 0)
        y = np.asarray(self.labels, dtype=int).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} samples but {y.shape[0]} labels")
        if y.size and not np.isin(y, (-1, 1)).all():
            raise ValueError("labels must be -1 or +1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "samples", X)
        object.__setattr__(self, "labels", y)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    @property
    def n_pos(self) -> int:
        return int(np.sum(self.labels == 1))

    @property
    def n_neg(self) -> int:
        return int(np.sum(self.labels == -1))

    @property
    def A(self) -> np.ndarray:
        """Rows labelled +1."""
        return self.samples[self.labels == 1]

    @property
    def B(self) -> np.ndarray:
        """Rows labelled -1."""
        return self.samples[self.labels == -1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return replace(self, samples=self.samples[idx], labels=self.labels[idx])

    def check_trainable(self):
        if self.n_pos == 0 or self.n_neg == 0:
            raise ValueError(f"both classes must be non-empty (n+={self.n_pos}, n-={self.n_neg})")


@dataclass(frozen=True)
class FoldPlan:
    fold_count: int
    assignments: np.ndarray
    seed: int = 0

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=int)
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def splits(self):
        for f in range(self.fold_count):
            yield self.train_indices(f), self.test_indices(f)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["row_index", "fold_id"])
            for i, f in enumerate(self.assignments):
                w.writerow([i, int(f)])

    @classmethod
    def from_csv(cls, path, seed: int = 0) -> "FoldPlan":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if rows and rows[0][0] == "row_index":
            rows = rows[1:]
        rows.sort(key=lambda r: int(r[0]))
        assignments = np.array([int(r[1]) for r in rows], dtype=int)
        return cls(int(assignments.max()) + 1, assignments, seed)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column: int | str = 0, label_map: Mapping[str, int] | None = None,
             header: bool | None = None) -> Dataset:
    """Read a labelled dataset from a comma-separated file.

    ``label_column`` is a column index (negative counts from the end) or a
    header name. ``header=None`` sniffs: the first row is a header when any of
    its feature cells is non-numeric. Raw label strings are mapped through
    ``label_map`` (default accepts ``1``/``+1``/``-1``).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    label_map = dict(DEFAULT_LABEL_MAP if label_map is None else label_map)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if r and any(c.strip() for c in r)]
    if not rows:
        return Dataset(np.zeros((0, 0)), np.zeros(0, dtype=int))

    first = [c.strip() for c in rows[0][1]]
    if isinstance(label_column, str) and not _is_int(label_column):
        header = True if header is None else header
        if not header:
            raise DataFormatError("a named label column needs a header row")
        if label_column not in first:
            raise DataFormatError(f"label column {label_column!r} not in header {first}")
        col = first.index(label_column)
    else:
        col = int(label_column)
        if col < 0:
            col += len(first)
        if not 0 <= col < len(first):
            raise DataFormatError(f"label column {label_column} out of range for {len(first)} columns")
    if header is None:
        header = any(not _is_number(c) for j, c in enumerate(first) if j != col)

    names = None
    if header:
        names = tuple(c for j, c in enumerate(first) if j != col)
        rows = rows[1:]
    arity = len(first)

    X, y = [], []
    for lineno, row in rows:
        if len(row) != arity:
            raise DataFormatError(f"line {lineno}: expected {arity} fields, got {len(row)}")
        raw = row[col].strip()
        if raw not in label_map:
            raise DataFormatError(f"line {lineno}: label {raw!r} not covered by label map")
        y.append(int(label_map[raw]))
        feats = []
        for j, cell in enumerate(row):
            if j == col:
                continue
            try:
                feats.append(float(cell))
            except ValueError:
                raise DataFormatError(f"line {lineno}, column {j}: non-numeric value {cell!r}") from None
        X.append(feats)
    X = np.array(X, dtype=float).reshape(len(y), arity - 1)
    return Dataset(X, np.array(y, dtype=int), names)


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


def save_csv(ds: Dataset, path, float_format: str = "%.17g") -> None:
    """Write ``label`` first, then features, with a header row."""
    names = ds.feature_names or tuple(f"x{j}" for j in range(ds.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", *names])
        for lab, row in zip(ds.labels, ds.samples):
            w.writerow([int(lab), *(float_format % v for v in row)])


def parse_label_map(spec: str | None) -> dict[str, int] | None:
    """``"M:1,B:-1"`` -> ``{"M": 1, "B": -1}``."""
    if not spec:
        return None
    out = {}
    for item in spec.split(","):
        raw, _, val = item.rpartition(":")
        if not raw or int(val) not in (-1, 1):
            raise ValueError(f"bad label-map entry {item!r}")
        out[raw.strip()] = int(val)
    return out


def fit_minmax(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[0] == 0:
        return np.zeros((X.shape[1], 2))
    return np.column_stack([X.min(axis=0), X.max(axis=0)])


def scale_minmax(X: np.ndarray, params: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    params = np.asarray(params, dtype=float)
    if X.ndim != 2 or params.shape != (X.shape[1], 2):
        raise ValueError(f"normalization arity mismatch: data has {X.shape[-1]} features, "
                         f"params cover {params.shape[0]}")
    lo, hi = params[:, 0], params[:, 1]
    span = hi - lo
    const = span == 0
    out = (X - lo) / np.where(const, 1.0, span)
    # constant features map to 0
    out[:, const] = 0.0
    return out


def normalize_minmax(ds: Dataset) -> Dataset:
    params = fit_minmax(ds.samples)
    return replace(ds, samples=scale_minmax(ds.samples, params), norm_params=params)


def apply_normalization(ds: Dataset, params) -> Dataset:
    """Scale with previously fitted (min, max) pairs; no clipping."""
    params = np.asarray(params, dtype=float)
    if ds.n == 0:
        if params.shape[0] != ds.d and ds.d != 0:
            raise ValueError("normalization arity mismatch")
        return replace(ds, norm_params=params)
    return replace(ds, samples=scale_minmax(ds.samples, params), norm_params=params)


def stratified_folds(ds: Dataset, k: int, seed: int = 0) -> FoldPlan:
    if k < 2:
        raise ValueError("fold count must be at least 2")
    for cls in (1, -1):
        cnt = int(np.sum(ds.labels == cls))
        if cnt < k:
            raise ValueError(f"class {cls:+d} has {cnt} samples, fewer than {k} folds")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(ds.labels == cls)) for cls in (1, -1)])
    assignments = np.empty(ds.n, dtype=int)
    # round-robin over the class-major order keeps both per-class and total counts balanced
    assignments[order] = np.arange(ds.n) % k
    return FoldPlan(k, assignments, seed)


def gen_checkerboard(n: int, cells: int = 4, seed: int = 0) -> Dataset:
    if n <= 0 or cells < 2:
        raise ValueError("need n > 0 and cells >= 2")
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, 2))
    return Dataset(X, checkerboard_labels(X, cells), ("x", "y"))


def checkerboard_labels(X: np.ndarray, cells: int) -> np.ndarray:
    idx = np.floor(np.asarray(X) * cells).astype(int)
    idx = np.minimum(idx, cells - 1)
    return np.where(idx.sum(axis=1) % 2 == 0, 1, -1)


def gen_two_gaussian_mixture(n_train: int, n_test: int, dims: int = 32, separation: float = 3.0,
                             seed: int = 0) -> tuple[Dataset, Dataset]:
    """Two identity-covariance Gaussians with means at +-(separation/2) * ones/sqrt(dims).

    Stands in for the NDC generator at the same (train, test, dims) shapes.
    Labels are fair coin flips; train and test are disjoint slices of one draw.
    """
    if n_train <= 0 or n_test <= 0 or dims <= 0:
        raise ValueError("counts must be positive")
    rng = np.random.default_rng(seed)
    n = n_train + n_test
    y = np.where(rng.random(n) < 0.5, 1, -1)
    mean = (separation / 2.0) * np.ones(dims) / math.sqrt(dims)
    X = rng.standard_normal((n, dims)) + y[:, None] * mean
    names = tuple(f"x{j}" for j in range(dims))
    return Dataset(X[:n_train], y[:n_train], names), Dataset(X[n_train:], y[n_train:], names)


NDC_SHAPES = {
    "NDC-1K": (1000, 100), "NDC-2K": (2000, 200), "NDC-3K": (3000, 300),
    "NDC-4K": (4000, 400), "NDC-5K": (5000, 500), "NDC-10K": (10000, 1000),
    "NDC-25K": (25000, 2500), "NDC-50K": (50000, 5000),
}
