"""Cross-validation, grid search, timing and the rank statistics used to compare classifiers."""
from __future__ import annotations

import csv
import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .data import Dataset, FoldPlan, gen_two_gaussian_mixture, normalize_minmax
from .kernel import LINEAR, KernelSpec, gaussian
from .tsvm import HyperParams, TwinModel, accuracy, train_rknn_tsvm, train_tsvm, train_wltsvm

CLASSIFIER_KINDS = ("rknn", "wltsvm", "tsvm")


class FoldError(RuntimeError):
    """A classifier failed on one cross-validation fold."""

    def __init__(self, fold: int, cause: BaseException):
        super().__init__(f"fold {fold}: {type(cause).__name__}: {cause}")
        self.fold = fold


@dataclass(frozen=True)
class Classifier:
    """Picklable recipe for one classifier at fixed parameters.

    ``tsvm`` reads c1/c2; ``wltsvm`` reads c1 as its single penalty plus k;
    ``rknn`` reads everything.
    """

    kind: str = "rknn"
    params: HyperParams = field(default_factory=HyperParams)

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}")

    def fit(self, train: Dataset) -> TwinModel:
        hp = self.params
        if self.kind == "rknn":
            return train_rknn_tsvm(train, hp)
        if self.kind == "tsvm":
            return train_tsvm(train, hp.c1, hp.c2, hp.kernel, rect_ratio=hp.rect_ratio, seed=hp.seed)
        return train_wltsvm(train, hp.c1, hp.k, hp.kernel, knn_algorithm=hp.knn_algorithm,
                            rect_ratio=hp.rect_ratio, seed=hp.seed)


@dataclass
class CvResult:
    mean_accuracy: float  # percent
    std_accuracy: float  # percent, population std over folds
    mean_train_time: float  # seconds
    per_fold: list = field(default_factory=list)  # (accuracy, train time) per fold
    best_params: HyperParams | None = None

    @classmethod
    def from_folds(cls, per_fold, params=None) -> "CvResult":
        acc = np.array([a for a, _ in per_fold], dtype=float)
        t = np.array([s for _, s in per_fold], dtype=float)
        return cls(float(acc.mean()), float(acc.std()), float(t.mean()), list(per_fold), params)


def cross_validate(clf: Classifier, data: Dataset, folds: FoldPlan) -> CvResult:
    """Per fold: fit min-max scaling on the training part, train, score the raw held-out part.

    Only training is timed. The model carries its scaling, so held-out
    samples are scaled with training statistics and never clipped.
    """
    if folds.assignments.shape[0] != data.n:
        raise ValueError(f"fold plan covers {folds.assignments.shape[0]} samples, data has {data.n}")
    per_fold = []
    for f, (tr, te) in enumerate(folds.splits()):
        try:
            train = normalize_minmax(data.subset(tr))
            t0 = time.perf_counter()
            model = clf.fit(train)
            elapsed = time.perf_counter() - t0
            acc = accuracy(model, data.subset(te))
        except Exception as exc:
            raise FoldError(f, exc) from exc
        per_fold.append((acc, elapsed))
    return CvResult.from_folds(per_fold, clf.params)


# ---------------------------------------------------------------- grid search

def _powers(lo, hi):
    return tuple(2.0 ** i for i in range(lo, hi + 1))


@dataclass(frozen=True)
class GridSpec:
    penalty_range: tuple = _powers(-8, 2)
    sigma_range: tuple = _powers(-10, 2)
    k_range: tuple = tuple(range(2, 16))
    tie_c2_c3: bool = True

    def __post_init__(self):
        for name in ("penalty_range", "sigma_range", "k_range"):
            vals = tuple(sorted(set(getattr(self, name))))
            if not vals:
                raise ValueError(f"{name} is empty")
            object.__setattr__(self, name, vals)
        if min(self.penalty_range) <= 0 or min(self.sigma_range) <= 0 or min(self.k_range) < 1:
            raise ValueError("grid values must be positive")

    def points(self, kind: str, kernel: str = "gaussian", base: HyperParams | None = None):
        """Every HyperParams the grid search visits for ``kind``."""
        base = base or HyperParams()
        pen, ks = self.penalty_range, self.k_range
        sigmas = self.sigma_range if kernel == "gaussian" else (None,)
        if kind == "rknn":
            if self.tie_c2_c3:
                combos = ((c1, c2, c2, s, k) for c1, c2, s, k in itertools.product(pen, pen, sigmas, ks))
            else:
                combos = itertools.product(pen, pen, pen, sigmas, ks)
        elif kind == "tsvm":
            combos = ((c1, c2, c2, s, base.k) for c1, c2, s in itertools.product(pen, pen, sigmas))
        elif kind == "wltsvm":
            combos = ((c, c, c, s, k) for c, s, k in itertools.product(pen, sigmas, ks))
        else:
            raise ValueError(f"unknown classifier kind {kind!r}")
        for c1, c2, c3, s, k in combos:
            spec = LINEAR if s is None else gaussian(s, base.kernel.squared_exponent)
            yield replace(base, c1=c1, c2=c2, c3=c3, k=k, kernel=spec)

    def size(self, kind: str, kernel: str = "gaussian") -> int:
        p, s, k = len(self.penalty_range), len(self.sigma_range), len(self.k_range)
        s = s if kernel == "gaussian" else 1
        if kind == "rknn":
            return p * (p if self.tie_c2_c3 else p * p) * s * k
        if kind == "tsvm":
            return p * p * s
        if kind == "wltsvm":
            return p * s * k
        raise ValueError(f"unknown classifier kind {kind!r}")


def _tie_key(res: CvResult):
    hp = res.best_params
    sigma = 0.0 if hp.kernel.is_linear else hp.kernel.sigma
    return (-res.mean_accuracy, hp.c1, sigma, hp.k, hp.c2, hp.c3)


def select_best(results: Sequence[CvResult]) -> CvResult:
    """Highest mean accuracy; ties go to smaller c1, then sigma, then k (then c2, c3)."""
    if not results:
        raise ValueError("no grid results to choose from")
    return min(results, key=_tie_key)


def grid_search(data: Dataset, grid: GridSpec, folds: FoldPlan, kind: str = "rknn",
                kernel: str = "gaussian", base: HyperParams | None = None, jobs: int = 1,
                return_all: bool = False):
    """Exhaustive search; every point is cross-validated on the same folds."""
    points = list(grid.points(kind, kernel, base))
    if not points:
        raise ValueError("empty grid")
    clfs = [Classifier(kind, hp) for hp in points]
    if jobs == 1:
        results = [cross_validate(c, data, folds) for c in clfs]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=jobs)(delayed(cross_validate)(c, data, folds) for c in clfs)
    best = select_best(results)
    return (best, results) if return_all else best


# ---------------------------------------------------------------- comparisons

def rank_table(scores, decimals: int | None = 2) -> np.ndarray:
    """Per-row ranks (1 = highest score), ties get the average rank.

    Scores are rounded to ``decimals`` first so that printed-equal values tie.
    """
    S = np.asarray(scores, dtype=float)
    if S.ndim != 2:
        raise ValueError("scores must be a datasets x algorithms matrix")
    if decimals is not None:
        S = np.round(S, decimals)
    return np.vstack([rankdata(-row, method="average") for row in S])


def friedman_test(ranks) -> tuple[float, float]:
    """Friedman chi-square over average ranks and the Iman-Davenport F statistic."""
    R = np.asarray(ranks, dtype=float)
    if R.ndim != 2:
        raise ValueError("ranks must be a datasets x algorithms matrix")
    N, k = R.shape
    if k < 2 or N < 2:
        raise ValueError(f"need at least 2 datasets and 2 algorithms, got N={N}, k={k}")
    mean_rank = R.mean(axis=0)
    chi = 12.0 * N / (k * (k + 1)) * (float(np.sum(mean_rank ** 2)) - k * (k + 1) ** 2 / 4.0)
    denom = N * (k - 1) - chi
    f_stat = math.inf if denom == 0 else (N - 1) * chi / denom
    return chi, f_stat


def win_draw_loss(results: Mapping[str, Sequence[float]], decimals: int = 2) -> dict:
    """{(a, b): (wins, draws, losses) of a against b} over all ordered algorithm pairs.

    Values equal after rounding to ``decimals`` count as draws.
    """
    names = list(results)
    cols = {}
    for name in names:
        col = np.asarray(results[name], dtype=float)
        if np.isnan(col).any():
            raise ValueError(f"{name}: missing accuracy cells")
        cols[name] = np.round(col, decimals)
    sizes = {c.shape for c in cols.values()}
    if len(sizes) > 1:
        raise ValueError("algorithms cover different numbers of datasets")
    out = {}
    for a, b in itertools.permutations(names, 2):
        x, y = cols[a], cols[b]
        out[(a, b)] = (int(np.sum(x > y)), int(np.sum(x == y)), int(np.sum(x < y)))
    return out


def timed_speedup(time_fsa: float, time_ldmdba: float) -> float:
    if not (time_fsa > 0 and time_ldmdba > 0):
        raise ValueError("training times must be positive")
    return time_fsa / time_ldmdba


# ---------------------------------------------------------------- scaling benchmark

BENCH_ALGOS = ("tsvm", "wltsvm", "rknn-fsa", "rknn-ldmdba")
# fixed scaling-experiment settings: every penalty 1, sigma 2^-15, k = 5
BENCH_PENALTY, BENCH_SIGMA, BENCH_K = 1.0, 2.0 ** -15, 5


def bench_classifier(algo: str, kernel: KernelSpec, rect_ratio: float, seed: int) -> Classifier:
    hp = HyperParams(c1=BENCH_PENALTY, c2=BENCH_PENALTY, k=BENCH_K, kernel=kernel,
                     rect_ratio=rect_ratio, seed=seed,
                     knn_algorithm="ldmdba" if algo == "rknn-ldmdba" else "fsa")
    kind = "rknn" if algo.startswith("rknn") else algo
    return Classifier(kind, hp)


def run_bench(sizes, dims: int = 32, kernel: KernelSpec | None = None, rect_ratio: float = 0.1,
              seed: int = 0, algos=BENCH_ALGOS, separation: float = 3.0) -> list[dict]:
    """Sequential timing on generated mixtures; one row per size per algorithm.

    ``speedup`` is the rknn-fsa training time over the row's own time, so on
    the rknn-ldmdba row it is the usual FSA/LDMDBA ratio.
    """
    kernel = gaussian(BENCH_SIGMA) if kernel is None else kernel
    rows = []
    for n in sizes:
        train, test = gen_two_gaussian_mixture(n, max(1, n // 10), dims, separation, seed)
        train = normalize_minmax(train)
        block = []
        for algo in algos:
            clf = bench_classifier(algo, kernel, rect_ratio, seed)
            t0 = time.perf_counter()
            model = clf.fit(train)
            elapsed = time.perf_counter() - t0
            block.append({"dataset": f"mixture-{n}", "n": n, "algorithm": algo,
                          "train_time": elapsed, "test_accuracy": accuracy(model, test)})
        ref = next((r["train_time"] for r in block if r["algorithm"] == "rknn-fsa"), None)
        for r in block:
            r["speedup"] = timed_speedup(ref, r["train_time"]) if ref else float("nan")
        rows.extend(block)
    return rows


# ---------------------------------------------------------------- CSV output

def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{x:.6g}"
    return str(x)


def params_label(hp: HyperParams | None, kind: str = "rknn") -> str:
    if hp is None:
        return ""
    parts = [f"c1={fmt(hp.c1)}"]
    if kind == "rknn":
        parts += [f"c2={fmt(hp.c2)}", f"c3={fmt(hp.c3)}"]
    elif kind == "tsvm":
        parts.append(f"c2={fmt(hp.c2)}")
    if not hp.kernel.is_linear:
        parts.append(f"sigma={fmt(hp.kernel.sigma)}")
    if kind != "tsvm":
        parts.append(f"k={hp.k}")
    return ";".join(parts)


def write_accuracy_table(rows, path) -> None:
    """rows: (dataset, algorithm label, classifier kind, CvResult)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset", "algorithm", "accuracy", "mean_accuracy", "std_accuracy",
                    "train_time", "params"])
        for dataset, label, kind, res in rows:
            w.writerow([dataset, label, f"{res.mean_accuracy:.2f}±{res.std_accuracy:.2f}",
                        fmt(res.mean_accuracy), fmt(res.std_accuracy), fmt(res.mean_train_time),
                        params_label(res.best_params, kind)])


def write_bench_table(rows, path) -> None:
    cols = ["dataset", "n", "algorithm", "train_time", "test_accuracy", "speedup"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt(r[c]) for c in cols])
