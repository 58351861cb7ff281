"""Twin SVM classifiers: RKNN-TSVM (linear and kernel), TSVM and WLTSVM.

All three share one fitting core. Each plane i solves

    min_u  1/2 sum_j d_j (h_j'u)^2 + c_box * sum xi + reg/2 ||u||^2

against the margin rows of the other class, through the dual
``Q = G_F M^-1 G_F'`` with ``M = H'DH + reg*I``. The augmented vector
``u = [w; b]`` is recovered from a Cholesky solve, never an explicit inverse.
"""
from __future__ import annotations

import json
import logging
import struct
import time
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .affinity import class_affinities
from .data import Dataset, scale_minmax
from .kernel import KernelSpec, LINEAR, gram_matrix, make_basis
from .neighbors import find_neighbors
from .solver import DEFAULT_TOL, DualProblem, clipdcd_solve

log = logging.getLogger(__name__)

# stand-in for a missing stabilizer (TSVM, WLTSVM)
EPSILON = 1e-8
SURFACE_NORMS = ("feature", "coef")


@dataclass(frozen=True)
class HyperParams:
    c1: float = 1.0
    c2: float = 1.0
    c3: float | None = None  # None ties c3 to c2
    k: int = 5
    kernel: KernelSpec = LINEAR
    knn_algorithm: str = "fsa"
    rect_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.c3 is None:
            object.__setattr__(self, "c3", self.c2)
        if min(self.c1, self.c2, self.c3) <= 0:
            raise ValueError("penalty parameters must be positive")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.knn_algorithm not in ("fsa", "ldmdba"):
            raise ValueError(f"unknown knn algorithm {self.knn_algorithm!r}")
        if not 0 < self.rect_ratio <= 1:
            raise ValueError("rect_ratio must lie in (0, 1]")


@dataclass(frozen=True)
class TwinModel:
    w1: np.ndarray  # w_1 (linear) or mu_1 (kernel)
    b1: float
    w2: np.ndarray
    b2: float
    kernel: KernelSpec = LINEAR
    basis: np.ndarray | None = None  # kernel surfaces are evaluated against these rows
    norm_params: np.ndarray | None = None
    info: dict = field(default_factory=dict, compare=False)
    # how kernel surfaces turn |K(x)mu + b| into a distance: "feature" divides by the
    # feature-space norm sqrt(mu' K(basis, basis) mu), "coef" by the plain ||mu||
    surface_norm: str = "feature"

    def __post_init__(self):
        if self.surface_norm not in SURFACE_NORMS:
            raise ValueError(f"unknown surface_norm {self.surface_norm!r}")

    @property
    def kind(self) -> str:
        return "linear" if self.basis is None else "kernel"

    @cached_property
    def normal_norms(self) -> tuple[float, float]:
        """Lengths of the two normal vectors used to scale decision values."""
        if self.basis is None or self.surface_norm == "coef":
            return float(np.linalg.norm(self.w1)), float(np.linalg.norm(self.w2))
        Kb = gram_matrix(self.kernel, self.basis, self.basis)
        q1 = max(float(self.w1 @ Kb @ self.w1), 0.0)
        q2 = max(float(self.w2 @ Kb @ self.w2), 0.0)
        return float(np.sqrt(q1)), float(np.sqrt(q2))

    @property
    def plane_pos(self):
        return self.w1, self.b1

    @property
    def plane_neg(self):
        return self.w2, self.b2


# ---------------------------------------------------------------- fitting core

def _fit_plane(H, d, G_F, c_box, reg, tol, sign):
    """Solve one twin problem; returns (u, alpha, solver report)."""
    p = H.shape[1]
    M = (H.T * d) @ H
    M[np.diag_indices(p)] += reg
    cho = cho_factor(M, lower=True)
    Z = cho_solve(cho, G_F.T)  # M^-1 G_F'
    Q = G_F @ Z
    Q = 0.5 * (Q + Q.T)
    rep = clipdcd_solve(DualProblem(Q, np.ones(G_F.shape[0]), c_box), tol=tol)
    u = sign * (Z @ rep.alpha)
    return u, rep


def _margin_rows(flags, label):
    flags = np.asarray(flags, dtype=bool)
    if not flags.any():
        log.warning("no margin points among class %+d samples; keeping all of them as constraints", label)
        return np.ones_like(flags)
    return flags


def _solve_twin(H, G, d_pos, d_neg, f_neg, f_pos, box1, box2, reg1, reg2, tol):
    f_neg = _margin_rows(f_neg, -1)
    f_pos = _margin_rows(f_pos, 1)
    u1, rep1 = _fit_plane(H, d_pos, G[f_neg], box1, reg1, tol, -1.0)
    u2, rep2 = _fit_plane(G, d_neg, H[f_pos], box2, reg2, tol, 1.0)
    info = {
        "margin_count_neg": int(f_neg.sum()), "margin_count_pos": int(f_pos.sum()),
        "dual_size_1": int(f_neg.sum()), "dual_size_2": int(f_pos.sum()),
        "iterations_1": rep1.iterations, "iterations_2": rep2.iterations,
        "alpha": rep1.alpha, "beta": rep2.alpha,
        "margin_rows_neg": f_neg, "margin_rows_pos": f_pos,
    }
    return u1, u2, info


def _augment(K):
    return np.hstack([K, np.ones((K.shape[0], 1))])


def _feature_blocks(train: Dataset, kernel: KernelSpec | None, rect_ratio: float, seed: int):
    """H, G and the basis (None for the plain linear formulation)."""
    A, B = train.A, train.B
    if kernel is None:
        return _augment(A), _augment(B), None
    basis = make_basis(train.samples, rect_ratio, seed).reference_rows
    return _augment(gram_matrix(kernel, A, basis)), _augment(gram_matrix(kernel, B, basis)), basis


def _graph_terms(train: Dataset, k, algorithm, space, weighting, filter_margin):
    """Sample weights (d for +1, q for -1) and margin flags (f for -1, p for +1)."""
    if weighting == "uniform":
        d_pos, d_neg = np.ones(train.n_pos), np.ones(train.n_neg)
        f_neg, f_pos = np.ones(train.n_neg, bool), np.ones(train.n_pos, bool)
        return d_pos, d_neg, f_neg, f_pos
    index = find_neighbors(train.samples, k, algorithm, space)
    pos, neg = class_affinities(index, train.labels, weighting)
    f_neg, f_pos = pos.margin_flags.astype(bool), neg.margin_flags.astype(bool)
    if not filter_margin:
        f_neg, f_pos = np.ones_like(f_neg), np.ones_like(f_pos)
    return pos.weights, neg.weights, f_neg, f_pos


def _fit(train: Dataset, *, c_box1, c_box2, reg1, reg2, k, algorithm, kernel, kernel_mode,
         rect_ratio=1.0, seed=0, weighting="distance", filter_margin=True, tol=DEFAULT_TOL,
         algo_name="rknn"):
    train.check_trainable()
    t0 = time.perf_counter()
    space = kernel if kernel_mode else None
    d_pos, d_neg, f_neg, f_pos = _graph_terms(train, k, algorithm, space, weighting, filter_margin)
    t_graph = time.perf_counter() - t0
    H, G, basis = _feature_blocks(train, kernel if kernel_mode else None, rect_ratio, seed)
    u1, u2, info = _solve_twin(H, G, d_pos, d_neg, f_neg, f_pos, c_box1, c_box2, reg1, reg2, tol)
    info.update({"algorithm": algo_name, "knn": algorithm if weighting != "uniform" else None,
                 "weights_pos": d_pos, "weights_neg": d_neg, "reg1": reg1, "reg2": reg2,
                 "graph_time": t_graph, "train_time": time.perf_counter() - t0})
    return TwinModel(u1[:-1].copy(), float(u1[-1]), u2[:-1].copy(), float(u2[-1]),
                     kernel if kernel_mode else LINEAR, basis, train.norm_params, info)


# ---------------------------------------------------------------- public trainers

def train_rknn_tsvm_linear(train: Dataset, hp: HyperParams, *, weighting: str = "distance",
                           filter_margin: bool = True, tol: float = DEFAULT_TOL) -> TwinModel:
    """Linear RKNN-TSVM. ``weighting='binary'`` swaps in plain KNN-graph counting weights."""
    return _fit(train, c_box1=hp.c1, c_box2=hp.c1, reg1=hp.c2, reg2=hp.c3, k=hp.k,
                algorithm=hp.knn_algorithm, kernel=LINEAR, kernel_mode=False,
                weighting=weighting, filter_margin=filter_margin, tol=tol)


def train_rknn_tsvm_kernel(train: Dataset, hp: HyperParams, *, weighting: str = "distance",
                           filter_margin: bool = True, tol: float = DEFAULT_TOL) -> TwinModel:
    """Kernel RKNN-TSVM; neighbours are searched in the kernel-induced space."""
    return _fit(train, c_box1=hp.c1, c_box2=hp.c1, reg1=hp.c2, reg2=hp.c3, k=hp.k,
                algorithm=hp.knn_algorithm, kernel=hp.kernel, kernel_mode=True,
                rect_ratio=hp.rect_ratio, seed=hp.seed, weighting=weighting,
                filter_margin=filter_margin, tol=tol)


def train_rknn_tsvm(train: Dataset, hp: HyperParams, **kw) -> TwinModel:
    if hp.kernel.is_linear and hp.rect_ratio == 1:
        return train_rknn_tsvm_linear(train, hp, **kw)
    return train_rknn_tsvm_kernel(train, hp, **kw)


def train_tsvm(train: Dataset, c1: float, c2: float, kernel: KernelSpec = LINEAR, *,
               rect_ratio: float = 1.0, seed: int = 0, tol: float = DEFAULT_TOL) -> TwinModel:
    """Standard TSVM: all samples weighted 1, every opposite-class row constrained."""
    return _fit(train, c_box1=c1, c_box2=c2, reg1=EPSILON, reg2=EPSILON, k=None, algorithm=None,
                kernel=kernel, kernel_mode=not kernel.is_linear or rect_ratio < 1,
                rect_ratio=rect_ratio, seed=seed, weighting="uniform", tol=tol, algo_name="tsvm")


def train_wltsvm(train: Dataset, c: float, k: int, kernel: KernelSpec = LINEAR, *,
                 knn_algorithm: str = "fsa", rect_ratio: float = 1.0, seed: int = 0,
                 weighting: str = "binary", filter_margin: bool = True,
                 tol: float = DEFAULT_TOL) -> TwinModel:
    """WLTSVM: counting weights from the binary KNN graph, one penalty ``c``."""
    return _fit(train, c_box1=c, c_box2=c, reg1=EPSILON, reg2=EPSILON, k=k, algorithm=knn_algorithm,
                kernel=kernel, kernel_mode=not kernel.is_linear or rect_ratio < 1,
                rect_ratio=rect_ratio, seed=seed, weighting=weighting,
                filter_margin=filter_margin, tol=tol, algo_name="wltsvm")


# ---------------------------------------------------------------- prediction

def _prepare(model: TwinModel, samples) -> np.ndarray:
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    d = model.w1.shape[0] if model.basis is None else model.basis.shape[1]
    if X.shape[1] != d:
        raise ValueError(f"feature arity mismatch: model expects {d}, got {X.shape[1]}")
    if model.norm_params is not None:
        X = scale_minmax(X, model.norm_params)
    return X


def decision_values(model: TwinModel, samples) -> np.ndarray:
    """(n, 2) perpendicular distances to plane/surface 1 and 2.

    Raw samples are scaled with the model's stored normalization first. For
    kernel models the scale follows ``model.surface_norm``.
    """
    X = _prepare(model, samples)
    F = X if model.basis is None else gram_matrix(model.kernel, X, model.basis)
    n1, n2 = model.normal_norms
    d1 = np.abs(F @ model.w1 + model.b1) / n1
    d2 = np.abs(F @ model.w2 + model.b2) / n2
    return np.column_stack([d1, d2])


def predict(model: TwinModel, samples) -> np.ndarray:
    dv = decision_values(model, samples)
    return np.where(dv[:, 0] < dv[:, 1], 1, -1)


def accuracy(model: TwinModel, ds: Dataset) -> float:
    """Percent correct on a dataset of raw (unscaled) samples."""
    if ds.n == 0:
        return float("nan")
    return 100.0 * float(np.mean(predict(model, ds.samples) == ds.labels))


# ---------------------------------------------------------------- model files
#
# layout: MAGIC | u32 header length | JSON header | raw little-endian float64 arrays
# in header["arrays"] order.

MAGIC = b"TWINSVM\x00"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def save_model(model: TwinModel, path) -> None:
    arrays = {"w1": model.w1, "w2": model.w2}
    if model.basis is not None:
        arrays["basis"] = model.basis
    if model.norm_params is not None:
        arrays["norm_params"] = model.norm_params
    header = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "b1": float(model.b1).hex(),
        "b2": float(model.b2).hex(),
        "kernel": model.kernel.to_dict(),
        "surface_norm": model.surface_norm,
        "arrays": [[name, list(np.shape(a))] for name, a in arrays.items()],
        "info": {k: v for k, v in model.info.items() if isinstance(v, (int, float, str)) or v is None},
    }
    head = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(head)))
        fh.write(head)
        for a in arrays.values():
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_model(path) -> TwinModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f"{path}: not a twin-SVM model file (bad magic)")
    pos = len(MAGIC)
    if len(blob) < pos + 4:
        raise ModelFormatError(f"{path}: truncated header")
    (hlen,) = struct.unpack_from("<I", blob, pos)
    pos += 4
    try:
        header = json.loads(blob[pos : pos + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt header") from exc
    pos += hlen
    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {header.get('format_version')}")
    arrays = {}
    for name, shape in header["arrays"]:
        count = int(np.prod(shape)) if shape else 1
        nbytes = 8 * count
        if len(blob) < pos + nbytes:
            raise ModelFormatError(f"{path}: truncated while reading {name}")
        arrays[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=pos).reshape(shape).astype(float)
        pos += nbytes
    if pos != len(blob):
        raise ModelFormatError(f"{path}: {len(blob) - pos} trailing bytes")
    basis = arrays.get("basis")
    if (header["kind"] == "kernel") != (basis is not None):
        raise ModelFormatError(f"{path}: kind {header['kind']!r} inconsistent with stored arrays")
    return TwinModel(arrays["w1"], float.fromhex(header["b1"]), arrays["w2"], float.fromhex(header["b2"]),
                     KernelSpec.from_dict(header["kernel"]), basis, arrays.get("norm_params"),
                     dict(header.get("info", {})), header.get("surface_norm", "feature"))


def with_norm_params(model: TwinModel, params) -> TwinModel:
    return replace(model, norm_params=None if params is None else np.asarray(params, dtype=float))
