"""Grid search on WDBC (scikit-learn copy, malignant = +1) or any labelled CSV.

Default grid: penalties 2^-8..2^2, widths 2^-10..2^2, k 2..15, c2 tied to c3.
The full grid is large; narrow it with --penalties/--sigmas/--ks for a quick run.
"""
import argparse

import numpy as np

from rknn_tsvm.data import Dataset, load_csv, stratified_folds
from rknn_tsvm.evaluation import GridSpec, grid_search, params_label, write_accuracy_table


def powers(spec):
    lo, hi = (int(x) for x in spec.split(":"))
    return tuple(2.0 ** e for e in range(lo, hi + 1))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--csv", help="labelled CSV, label in the first column; WDBC when omitted")
    ap.add_argument("--penalties", default="-8:2")
    ap.add_argument("--sigmas", default="-10:2")
    ap.add_argument("--ks", default="2:15")
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=-1)
    ap.add_argument("--out", default="uci_gridsearch.csv")
    args = ap.parse_args()
    if args.csv:
        ds, name = load_csv(args.csv), args.csv
    else:
        from sklearn.datasets import load_breast_cancer

        raw = load_breast_cancer()
        ds, name = Dataset(raw.data, np.where(raw.target == 0, 1, -1)), "WDBC"
    lo, hi = (int(x) for x in args.ks.split(":"))
    grid = GridSpec(powers(args.penalties), powers(args.sigmas), tuple(range(lo, hi + 1)))
    folds = stratified_folds(ds, args.folds, args.seed)
    rows = []
    for kind, label in (("tsvm", "TSVM"), ("wltsvm", "WLTSVM"), ("rknn", "RKNN-TSVM")):
        print(f"{label}: {grid.size(kind, 'gaussian')} grid points")
        best = grid_search(ds, grid, folds, kind, "gaussian", jobs=args.jobs)
        print(f"  {best.mean_accuracy:.2f} +- {best.std_accuracy:.2f}%  {params_label(best.best_params, kind)}")
        rows.append((name, label, kind, best))
    write_accuracy_table(rows, args.out)


if __name__ == "__main__":
    main()
