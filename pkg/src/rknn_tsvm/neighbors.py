"""Exact (full search) and reference-point (LDMDBA) k-nearest-neighbour search.

Both searches work in input space or in the feature space induced by a
kernel. Distances for a pair are always produced by the same ``cdist`` call
shape, so the two algorithms agree bit-for-bit whenever they see the same
candidates. Ties are broken by ascending sample index.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .kernel import KernelSpec, feature_distance

ALGORITHMS = ("fsa", "ldmdba")

# rows of the distance matrix held in memory at once by the full search
_BLOCK_ELEMS = 4_000_000


@dataclass(frozen=True)
class NeighborIndex:
    k: int
    indices: np.ndarray  # (n, k) neighbour ids, nearest first
    distances: np.ndarray  # (n, k) ascending
    algorithm: str = "fsa"
    space: KernelSpec | None = None  # None means input space

    def __post_init__(self):
        for name in ("indices", "distances"):
            a = np.asarray(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["sample_index", "rank", "neighbor_index", "distance"])
            for j in range(self.n):
                for r in range(self.k):
                    w.writerow([j, r + 1, int(self.indices[j, r]), f"{self.distances[j, r]:.17g}"])


@dataclass(frozen=True)
class ReferencePointPlan:
    points: np.ndarray  # (num_refs, d)
    subsequence_halfwidth: int


def reference_plan(n: int, d: int, k: int) -> ReferencePointPlan:
    """ceil(log2 d) reference points (at least one); point i has its first i coords at -1."""
    if n < 3:
        raise ValueError("reference-point search needs n >= 3 (log2 log2 n must be positive)")
    m = max(1, math.ceil(math.log2(d))) if d > 1 else 1
    pts = np.ones((m, d))
    for i in range(m):
        pts[i, : i + 1] = -1.0
    halfwidth = math.ceil(k * math.log2(math.log2(n)))
    return ReferencePointPlan(pts, halfwidth)


def _check(X, k):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    return X


def _pick(dist: np.ndarray, cand: np.ndarray, k: int):
    """k smallest of ``dist`` (aligned with ascending ``cand``), ties -> lower index."""
    order = np.argsort(dist, kind="stable")[:k]
    return cand[order], dist[order]


def knn_fsa(data, k: int, space: KernelSpec | None = None) -> NeighborIndex:
    """Exact k nearest neighbours by computing every pairwise distance."""
    X = _check(data, k)
    n = X.shape[0]
    idx = np.empty((n, k), dtype=np.int64)
    dst = np.empty((n, k))
    block = max(1, _BLOCK_ELEMS // n)
    everything = np.arange(n)
    for start in range(0, n, block):
        stop = min(n, start + block)
        D = feature_distance(space, cdist(X[start:stop], X, "sqeuclidean"))
        rows = np.arange(stop - start)
        D[rows, start + rows] = np.inf
        kth = np.partition(D, k - 1, axis=1)[:, k - 1]
        for r in rows:
            row = D[r]
            cand = everything[row <= kth[r]]
            idx[start + r], dst[start + r] = _pick(row[cand], cand, k)
    return NeighborIndex(k, idx, dst, "fsa", space)


def knn_ldmdba(data, k: int, space: KernelSpec | None = None) -> NeighborIndex:
    """Approximate k nearest neighbours from reference-point orderings.

    For every reference point the samples are sorted by their distance to it;
    each sample's candidates are the samples within ``halfwidth`` positions
    of it in that order (truncated at the ends). Candidates from all
    reference points are pooled and the k closest by exact distance kept.
    """
    X = _check(data, k)
    n, d = X.shape
    plan = reference_plan(n, d, k)
    hw = plan.subsequence_halfwidth
    offs = np.concatenate([np.arange(-hw, 0), np.arange(1, hw + 1)])
    pools = []
    for ref in plan.points:
        key = feature_distance(space, cdist(X, ref[None, :], "sqeuclidean"))[:, 0]
        order = np.argsort(key, kind="stable")
        pos = np.empty(n, dtype=np.int64)
        pos[order] = np.arange(n)
        p = pos[:, None] + offs[None, :]
        ok = (p >= 0) & (p < n)
        pools.append(np.where(ok, order[np.clip(p, 0, n - 1)], -1))
    pool = np.concatenate(pools, axis=1)

    idx = np.empty((n, k), dtype=np.int64)
    dst = np.empty((n, k))
    for j in range(n):
        cand = np.unique(pool[j])
        if cand[0] < 0:
            cand = cand[1:]
        if cand.size < k:
            raise RuntimeError(f"sample {j}: only {cand.size} candidates for k={k}")
        dist = feature_distance(space, cdist(X[j : j + 1], X[cand], "sqeuclidean"))[0]
        idx[j], dst[j] = _pick(dist, cand, k)
    return NeighborIndex(k, idx, dst, "ldmdba", space)


def find_neighbors(data, k: int, algorithm: str = "fsa", space: KernelSpec | None = None) -> NeighborIndex:
    if algorithm == "fsa":
        return knn_fsa(data, k, space)
    if algorithm == "ldmdba":
        return knn_ldmdba(data, k, space)
    raise ValueError(f"unknown knn algorithm {algorithm!r}")


def knn_recall(approx: NeighborIndex, exact: NeighborIndex) -> float:
    """Mean fraction of true neighbours recovered per sample."""
    if approx.k != exact.k or approx.n != exact.n:
        raise ValueError("recall needs indexes with the same n and k")
    hits = sum(len(np.intersect1d(a, e, assume_unique=True)) for a, e in zip(approx.indices, exact.indices))
    return hits / (approx.n * approx.k)
