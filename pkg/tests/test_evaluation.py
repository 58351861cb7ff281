import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import rankdata

from conftest import blobs
from rknn_tsvm.data import Dataset, stratified_folds
from rknn_tsvm.evaluation import (Classifier, CvResult, FoldError, GridSpec, cross_validate, friedman_test,
                                  grid_search, rank_table, run_bench, select_best, timed_speedup,
                                  win_draw_loss, write_accuracy_table, write_bench_table)
from rknn_tsvm.kernel import gaussian
from rknn_tsvm.tsvm import HyperParams, TwinModel

ALGOS = ["TSVM", "TBSVM", "WLTSVM", "RKNN-FSA", "RKNN-LDMDBA"]
# published mean accuracies (%) on 11 UCI sets, algorithm order as ALGOS
PUBLISHED_ACC = np.array([
    [87.10, 87.39, 86.52, 87.54, 87.97],  # Australian
    [84.81, 85.93, 83.70, 85.93, 85.56],  # Heart
    [74.78, 73.62, 73.91, 73.91, 73.91],  # Bupa
    [79.27, 78.81, 78.82, 80.29, 80.32],  # WPBC
    [98.24, 98.24, 97.54, 98.59, 98.59],  # WDBC
    [85.81, 87.10, 85.16, 87.74, 88.39],  # Hepatitis
    [90.89, 92.02, 92.60, 93.73, 93.17],  # Ionosphere
    [75.46, 75.82, 76.11, 76.77, 76.79],  # Haberman
    [78.65, 78.26, 77.22, 78.78, 78.91],  # Pima
    [88.00, 89.00, 88.00, 90.00, 91.00],  # Fertility
    [96.55, 97.01, 96.55, 97.01, 97.01],  # Votes
])
PUBLISHED_RANKS = np.array([
    [4, 3, 5, 2, 1], [4, 1.5, 5, 1.5, 3], [1, 5, 3, 3, 3], [3, 5, 4, 2, 1],
    [3.5, 3.5, 5, 1.5, 1.5], [4, 3, 5, 2, 1], [5, 4, 3, 1, 2], [5, 4, 3, 2, 1],
    [3, 4, 5, 2, 1], [4.5, 3, 4.5, 2, 1], [4.5, 2, 4.5, 2, 2],
])


class _Const:
    """Stub classifier: always +1."""

    params = HyperParams()

    def fit(self, train):
        return TwinModel(np.r_[1.0, np.zeros(train.d - 1)], 0.0, np.r_[1.0, np.zeros(train.d - 1)], 1e12)


class _Broken:
    params = HyperParams()

    def fit(self, train):
        raise np.linalg.LinAlgError("boom")


# ---------------------------------------------------------------- cross-validation

def test_constant_predictor_scores_class_share():
    ds = blobs(50, 50, seed=0)
    res = cross_validate(_Const(), ds, stratified_folds(ds, 5, 0))
    assert res.mean_accuracy == pytest.approx(50.0)


def test_separable_clusters_perfect():
    ds = blobs(40, 40, d=2, gap=12.0, spread=0.5, seed=1)
    res = cross_validate(Classifier("rknn", HyperParams(c1=1, c2=0.1, k=5)), ds, stratified_folds(ds, 5, 0))
    assert res.mean_accuracy == 100.0 and res.std_accuracy == 0.0


def test_cv_deterministic_and_recomputable():
    ds = blobs(40, 35, d=3, gap=1.0, seed=2)
    folds = stratified_folds(ds, 5, 3)
    clf = Classifier("rknn", HyperParams(c1=0.5, c2=0.25, k=4, kernel=gaussian(0.5)))
    a, b = cross_validate(clf, ds, folds), cross_validate(clf, ds, folds)
    assert [x for x, _ in a.per_fold] == [x for x, _ in b.per_fold]
    accs = np.array([x for x, _ in a.per_fold])
    assert abs(a.mean_accuracy - accs.mean()) <= 1e-12
    assert abs(a.std_accuracy - accs.std()) <= 1e-12
    assert 0 <= a.mean_accuracy <= 100 and a.std_accuracy >= 0
    assert a.mean_train_time > 0


def test_cv_error_carries_fold_id():
    ds = blobs(10, 10, seed=0)
    with pytest.raises(FoldError, match="fold 0"):
        cross_validate(_Broken(), ds, stratified_folds(ds, 5, 0))


def test_cv_normalizes_on_training_part_only():
    # an extreme value only in one held-out fold must not change training scaling
    ds = blobs(20, 20, d=2, gap=4.0, seed=3)
    X = np.array(ds.samples)
    X[0] = [1e6, 1e6]
    ds = Dataset(X, ds.labels)
    folds = stratified_folds(ds, 5, 0)
    res = cross_validate(Classifier("tsvm", HyperParams()), ds, folds)
    assert len(res.per_fold) == 5


@pytest.mark.parametrize("kind", ["tsvm", "wltsvm", "rknn"])
def test_all_classifier_kinds_run(kind):
    ds = blobs(20, 20, d=2, gap=3.0, seed=4)
    res = cross_validate(Classifier(kind, HyperParams(k=3)), ds, stratified_folds(ds, 4, 0))
    assert res.mean_accuracy > 80


def test_classifier_kind_validated():
    with pytest.raises(ValueError):
        Classifier("svm")


# ---------------------------------------------------------------- grid search

def test_default_grid_sizes():
    g = GridSpec()
    assert len(g.penalty_range) == 11 and len(g.sigma_range) == 13 and len(g.k_range) == 14
    assert g.size("rknn") == 11 * 11 * 13 * 14 == 22022
    assert sum(1 for _ in g.points("rknn")) == 22022
    assert g.size("wltsvm") == sum(1 for _ in g.points("wltsvm")) == 11 * 13 * 14
    assert g.size("tsvm") == sum(1 for _ in g.points("tsvm")) == 11 * 11 * 13
    assert g.size("rknn", "linear") == 11 * 11 * 14
    untied = GridSpec(tie_c2_c3=False)
    assert untied.size("rknn") == 11 ** 3 * 13 * 14
    assert all(hp.c2 == hp.c3 for hp in GridSpec((1, 2), (1,), (2,)).points("rknn"))


def test_grid_requires_values():
    with pytest.raises(ValueError):
        GridSpec(penalty_range=())
    with pytest.raises(ValueError):
        GridSpec(sigma_range=(0.0,))


def test_single_point_grid_equals_cv():
    ds = blobs(25, 25, d=2, gap=1.5, seed=5)
    folds = stratified_folds(ds, 5, 1)
    grid = GridSpec((0.5,), (0.25,), (4,))
    best = grid_search(ds, grid, folds, "rknn", "gaussian")
    hp = HyperParams(c1=0.5, c2=0.5, k=4, kernel=gaussian(0.25))
    direct = cross_validate(Classifier("rknn", hp), ds, folds)
    assert best.mean_accuracy == direct.mean_accuracy and best.best_params == hp


def test_superset_grid_not_worse_and_parallel_agrees():
    ds = blobs(25, 25, d=2, gap=1.5, seed=6)
    folds = stratified_folds(ds, 5, 2)
    small = grid_search(ds, GridSpec((1.0,), (0.5,), (5,)), folds, "rknn")
    big = GridSpec((0.25, 1.0), (0.125, 0.5), (3, 5))
    seq = grid_search(ds, big, folds, "rknn")
    par = grid_search(ds, big, folds, "rknn", jobs=2)
    assert seq.mean_accuracy >= small.mean_accuracy
    assert par.best_params == seq.best_params and par.mean_accuracy == seq.mean_accuracy


def _res(acc, c1, sigma, k, c2=1.0):
    return CvResult(acc, 0.0, 0.0, [], HyperParams(c1=c1, c2=c2, k=k, kernel=gaussian(sigma)))


def test_tie_break_order():
    rs = [_res(90, 1.0, 0.5, 3), _res(90, 0.5, 1.0, 9), _res(90, 0.5, 0.5, 7), _res(90, 0.5, 0.5, 4),
          _res(89, 0.1, 0.1, 2)]
    best = select_best(rs)
    assert (best.best_params.c1, best.best_params.kernel.sigma, best.best_params.k) == (0.5, 0.5, 4)


@given(st.permutations(list(range(8))))
def test_selection_invariant_to_order(perm):
    rs = [_res(acc, c1, s, k) for acc, c1, s, k in
          [(80, 1, 1, 2), (85, 2, 1, 3), (85, 1, 2, 3), (85, 1, 2, 2), (70, 0.5, 0.5, 2),
           (85, 1, 1, 5), (84.999, 0.1, 0.1, 2), (85, 4, 0.1, 2)]]
    assert select_best([rs[i] for i in perm]) is rs[5]


# ---------------------------------------------------------------- Friedman / ranks

def test_friedman_identical_ranks():
    R = np.full((6, 4), 2.5)
    chi, f = friedman_test(R)
    assert chi == 0.0 and f == 0.0


def test_friedman_published_ranks():
    chi, f = friedman_test(PUBLISHED_RANKS)
    assert 24.3 <= chi <= 24.7 and 12.3 <= f <= 12.8
    np.testing.assert_allclose(PUBLISHED_RANKS.mean(0), [3.77, 3.45, 4.27, 1.91, 1.59], atol=0.005)


def test_friedman_two_algorithms_hand_value():
    N = 7
    R = np.tile([1.0, 2.0], (N, 1))
    chi, f = friedman_test(R)
    # 12N/(k(k+1)) * [(1)^2 + (2)^2 - k(k+1)^2/4] with k = 2
    assert chi == pytest.approx(N * 2.0 * (1 + 4 - 4.5))
    assert chi == pytest.approx(N)
    assert f == np.inf  # N(k-1) - chi = 0


def test_friedman_errors():
    with pytest.raises(ValueError):
        friedman_test(np.ones((5, 1)))
    with pytest.raises(ValueError):
        friedman_test(np.ones((1, 3)))


def brute_friedman(R):
    N, k = R.shape
    sums = [sum(R[i, j] for i in range(N)) for j in range(k)]
    chi = 12.0 / (N * k * (k + 1)) * sum(s * s for s in sums) - 3.0 * N * (k + 1)
    denom = N * (k - 1) - chi
    return chi, (np.inf if abs(denom) < 1e-12 else (N - 1) * chi / denom)


@given(st.integers(2, 15), st.integers(2, 7), st.integers(0, 2**31))
def test_friedman_matches_rank_sum_form(N, k, seed):
    rng = np.random.default_rng(seed)
    R = np.vstack([rankdata(rng.integers(0, 4, k)) for _ in range(N)])
    chi, f = friedman_test(R)
    bchi, bf = brute_friedman(R)
    assert abs(chi - bchi) <= 1e-10
    if np.isfinite(f):
        assert abs(f - bf) <= 1e-10 * max(1.0, abs(bf))


def test_rank_table_reproduces_published_ranks():
    np.testing.assert_array_equal(rank_table(PUBLISHED_ACC), PUBLISHED_RANKS)


# ---------------------------------------------------------------- win/draw/loss

def test_wdl_basic():
    same = {"a": [1.0, 2.0, 3.0], "b": [1.0, 2.0, 3.0]}
    assert win_draw_loss(same)[("a", "b")] == (0, 3, 0)
    dom = {"a": [5.0, 6.0, 7.0], "b": [1.0, 2.0, 3.0]}
    assert win_draw_loss(dom)[("a", "b")] == (3, 0, 0)
    assert win_draw_loss({"a": [1.004], "b": [1.0]})[("a", "b")] == (0, 1, 0)
    with pytest.raises(ValueError):
        win_draw_loss({"a": [1.0, np.nan], "b": [1.0, 2.0]})
    with pytest.raises(ValueError):
        win_draw_loss({"a": [1.0], "b": [1.0, 2.0]})


def test_wdl_published_records():
    cols = {name: PUBLISHED_ACC[:, j] for j, name in enumerate(ALGOS)}
    wdl = win_draw_loss(cols)
    assert wdl[("RKNN-LDMDBA", "TSVM")] == (10, 0, 1)
    assert wdl[("RKNN-LDMDBA", "TBSVM")] == (9, 1, 1)
    assert wdl[("RKNN-LDMDBA", "WLTSVM")] == (10, 1, 0)
    assert wdl[("RKNN-LDMDBA", "RKNN-FSA")] == (6, 3, 2)


# ---------------------------------------------------------------- speedup / bench / csv

def test_speedup_examples():
    assert timed_speedup(2.0, 2.0) == 1.0
    assert round(timed_speedup(52.867, 16.25), 2) == 3.25
    assert timed_speedup(963.341, 67.485) == pytest.approx(14.27, abs=0.005)
    with pytest.raises(ValueError):
        timed_speedup(0.0, 1.0)


def test_run_bench_rows():
    rows = run_bench([300, 400], dims=8)
    assert len(rows) == 8
    assert {r["algorithm"] for r in rows} == {"tsvm", "wltsvm", "rknn-fsa", "rknn-ldmdba"}
    assert all(r["speedup"] > 0 for r in rows)
    assert all(r["speedup"] == 1.0 for r in rows if r["algorithm"] == "rknn-fsa")


def test_csv_writers(tmp_path):
    res = _res(97.123456, 0.125, 2.0 ** -6, 6, c2=0.0625)
    write_accuracy_table([("wdbc", "RKNN-TSVM(FSA)", "rknn", res)], tmp_path / "a.csv")
    rows = list(csv.reader(open(tmp_path / "a.csv")))
    assert rows[0] == ["dataset", "algorithm", "accuracy", "mean_accuracy", "std_accuracy", "train_time", "params"]
    assert rows[1][3] == "97.1235" and rows[1][6] == "c1=0.125;c2=0.0625;c3=0.0625;sigma=0.015625;k=6"
    write_bench_table([{"dataset": "m", "n": 10, "algorithm": "tsvm", "train_time": 1 / 3,
                        "test_accuracy": 50.0, "speedup": 2.0}], tmp_path / "b.csv")
    rows = list(csv.reader(open(tmp_path / "b.csv")))
    assert rows[0][-1] == "speedup" and rows[1][3] == "0.333333"
