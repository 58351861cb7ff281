"""Distance-weighted intra/inter-class KNN graphs, sample weights and margin points."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .neighbors import NeighborIndex

WEIGHTINGS = ("distance", "binary")


def neighbor_weight(dist_to_i: float, dist_to_first: float, dist_to_kth: float) -> float:
    """Linear rank weight of a neighbour: 1 for the nearest, 0 for the k-th."""
    if not dist_to_first <= dist_to_i <= dist_to_kth:
        raise ValueError(f"neighbour distances out of order: first={dist_to_first}, "
                         f"this={dist_to_i}, kth={dist_to_kth}")
    if dist_to_kth == dist_to_first:
        return 1.0
    return (dist_to_kth - dist_to_i) / (dist_to_kth - dist_to_first)


def neighbor_weights(index: NeighborIndex, weighting: str = "distance") -> np.ndarray:
    """(n, k) array of weights for every (sample, rank) entry of ``index``.

    ``binary`` gives every listed neighbour weight 1 (plain KNN-graph counting).
    """
    if weighting == "binary":
        return np.ones(index.indices.shape)
    if weighting != "distance":
        raise ValueError(f"unknown weighting {weighting!r}")
    D = index.distances
    first, kth = D[:, :1], D[:, -1:]
    span = kth - first
    if np.any(D < first) or np.any(D > kth):
        raise ValueError("neighbour lists must be sorted by distance")
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (kth - D) / span
    return np.where(span == 0, 1.0, w)


@dataclass(frozen=True)
class WeightGraph:
    intra: sp.csr_matrix  # (n_c, n_c)
    inter: sp.csr_matrix  # (n_c, n_other); column j = other-class sample j
    target_class: int = 1


@dataclass(frozen=True)
class AffinityResult:
    weights: np.ndarray  # d_j for the target class
    margin_flags: np.ndarray  # f_j for the other class
    margin_count: int

    def to_csv(self, path, which: str = "weights") -> None:
        """Dump ``index, weight`` or ``index, margin_flag`` rows."""
        vals = self.weights if which == "weights" else self.margin_flags
        col = "weight" if which == "weights" else "margin_flag"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["index", col])
            for i, v in enumerate(vals):
                w.writerow([i, f"{v:.6g}" if which == "weights" else int(v)])


def build_weight_graphs(index: NeighborIndex, labels, target_class: int = 1,
                        weighting: str = "distance") -> WeightGraph:
    """Intra-class graph (OR-symmetrised, max of the two directions, unit diagonal)
    and inter-class graph for ``target_class`` from a KNN index over the full set."""
    labels = np.asarray(labels)
    if labels.shape[0] != index.n:
        raise ValueError("labels and neighbour index disagree on n")
    own = np.flatnonzero(labels == target_class)
    other = np.flatnonzero(labels != target_class)
    if own.size == 0:
        raise ValueError(f"class {target_class:+d} is empty")
    local = np.full(index.n, -1, dtype=np.int64)
    local[own] = np.arange(own.size)
    local[other] = np.arange(other.size)

    W = neighbor_weights(index, weighting)
    nbr = index.indices
    n_c, n_o = own.size, other.size

    # x_i in Nea_s(x_j): entry (i, j) carries the weight of i in j's list
    sub = nbr[own]
    same = labels[sub] == target_class
    rows_j = np.broadcast_to(np.arange(n_c)[:, None], sub.shape)[same]
    M = sp.coo_matrix((W[own][same], (local[sub[same]], rows_j)), shape=(n_c, n_c)).tocsr()
    intra = M.maximum(M.T).tolil()
    intra.setdiag(1.0)
    intra = intra.tocsr()
    intra.eliminate_zeros()

    # x_i (target class) in Nea_d(x_j) for x_j in the other class
    sub = nbr[other]
    cross = labels[sub] == target_class
    cols_j = np.broadcast_to(np.arange(n_o)[:, None], sub.shape)[cross]
    inter = sp.coo_matrix((W[other][cross], (local[sub[cross]], cols_j)), shape=(n_c, n_o)).tocsr()
    inter.eliminate_zeros()
    return WeightGraph(intra, inter, target_class)


def affinity_for_class(graph: WeightGraph) -> AffinityResult:
    weights = np.asarray(graph.intra.sum(axis=0)).ravel()
    flags = (graph.inter.getnnz(axis=0) > 0).astype(int)
    return AffinityResult(weights, flags, int(flags.sum()))


def class_affinities(index: NeighborIndex, labels, weighting: str = "distance"):
    """(result for +1, result for -1); each carries its own weights and the other class's flags."""
    pos = affinity_for_class(build_weight_graphs(index, labels, 1, weighting))
    neg = affinity_for_class(build_weight_graphs(index, labels, -1, weighting))
    return pos, neg
