"""Kernel functions, Gram assembly and rectangular-kernel bases."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

KINDS = ("linear", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    sigma: float = 1.0
    # False gives exp(-||x - y|| / (2 sigma^2)), the unsquared variant
    squared_exponent: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValueError("gaussian kernel needs sigma > 0")

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": float(self.sigma), "squared_exponent": bool(self.squared_exponent)}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(d["kind"], float(d["sigma"]), bool(d["squared_exponent"]))


LINEAR = KernelSpec("linear")


def gaussian(sigma: float, squared_exponent: bool = True) -> KernelSpec:
    return KernelSpec("gaussian", sigma, squared_exponent)


@dataclass(frozen=True)
class KernelBasis:
    """Reference rows the kernel columns are evaluated against."""

    reference_rows: np.ndarray
    ratio: float = 1.0
    indices: np.ndarray | None = None

    def __post_init__(self):
        R = np.asarray(self.reference_rows, dtype=float)
        R.setflags(write=False)
        object.__setattr__(self, "reference_rows", R)
        if not 0 < self.ratio <= 1:
            raise ValueError("basis ratio must lie in (0, 1]")

    @property
    def size(self) -> int:
        return self.reference_rows.shape[0]


def make_basis(train_rows: np.ndarray, ratio: float = 1.0, seed: int = 0) -> KernelBasis:
    """Full basis for ``ratio == 1``, else ``ceil(ratio * n)`` rows drawn without replacement."""
    train_rows = np.asarray(train_rows, dtype=float)
    n = train_rows.shape[0]
    if not 0 < ratio <= 1:
        raise ValueError("basis ratio must lie in (0, 1]")
    if ratio == 1:
        return KernelBasis(train_rows, 1.0, np.arange(n))
    m = max(1, math.ceil(ratio * n))
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    return KernelBasis(train_rows[idx], ratio, idx)


def _from_sqdist(spec: KernelSpec, sq: np.ndarray) -> np.ndarray:
    r = sq if spec.squared_exponent else np.sqrt(sq)
    return np.exp(-r / (2.0 * spec.sigma ** 2))


def kernel_value(spec: KernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.is_linear:
        return float(x @ y)
    diff = x - y
    return float(_from_sqdist(spec, np.float64(diff @ diff)))


def gram_matrix(spec: KernelSpec, rows, basis) -> np.ndarray:
    """K[i, j] = k(rows[i], basis[j]); ``basis`` is a KernelBasis or a plain matrix."""
    if isinstance(basis, KernelBasis):
        basis = basis.reference_rows
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if rows.shape[1] != basis.shape[1]:
        raise ValueError(f"dimension mismatch: {rows.shape[1]} vs {basis.shape[1]}")
    if spec.is_linear:
        return rows @ basis.T
    # cdist evaluates each pair independently, so K is exactly symmetric for rows == basis
    return _from_sqdist(spec, cdist(rows, basis, "sqeuclidean"))


def feature_distance(spec: KernelSpec | None, sq: np.ndarray) -> np.ndarray:
    """Map squared Euclidean distances to distances in the kernel-induced space.

    ``sqrt(k(x,x) - 2 k(x,y) + k(y,y))``; for the linear kernel (or ``None``,
    input space) this is the Euclidean distance itself.
    """
    if spec is None or spec.is_linear:
        return np.sqrt(sq)
    r = sq if spec.squared_exponent else np.sqrt(sq)
    # 2 - 2 exp(-t), written with expm1 so that near-duplicates keep their ordering
    return np.sqrt(-2.0 * np.expm1(-r / (2.0 * spec.sigma ** 2)))
