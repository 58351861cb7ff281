"""Grid-searched RKNN-TSVM, WLTSVM and TSVM on a generated checkerboard.

Small default grid so the demo finishes in a few minutes on one core.
"""
import argparse

from rknn_tsvm.data import gen_checkerboard, stratified_folds
from rknn_tsvm.evaluation import GridSpec, grid_search, params_label


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=800)
    ap.add_argument("--cells", type=int, default=4)
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    ds = gen_checkerboard(args.n, args.cells, args.seed)
    folds = stratified_folds(ds, args.folds, args.seed)
    grid = GridSpec(tuple(2.0 ** e for e in range(-2, 3)), tuple(2.0 ** e for e in range(-4, -1)), (3, 5, 8))
    for kind in ("tsvm", "wltsvm", "rknn"):
        best = grid_search(ds, grid, folds, kind, "gaussian", jobs=args.jobs)
        print(f"{kind:>7}: {best.mean_accuracy:6.2f} +- {best.std_accuracy:5.2f}%  "
              f"{params_label(best.best_params, kind)}")


if __name__ == "__main__":
    main()
