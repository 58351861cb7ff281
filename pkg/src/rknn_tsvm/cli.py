"""Command-line front end: train, predict, cv, gridsearch, bench, gen, diag."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .affinity import class_affinities
from .data import (Dataset, gen_checkerboard, gen_two_gaussian_mixture, load_csv, normalize_minmax,
                   parse_label_map, save_csv, stratified_folds)
from .evaluation import (BENCH_SIGMA, Classifier, GridSpec, cross_validate, fmt, grid_search,
                         params_label, run_bench, write_accuracy_table, write_bench_table)
from .kernel import LINEAR, gaussian
from .neighbors import find_neighbors, knn_recall
from .tsvm import HyperParams, accuracy, decision_values, load_model, predict, save_model


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one line, no usage dump
        self.exit(2, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- flag types

def _positive_float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not (v > 0 and np.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {s}")
    return v


def _positive_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _ratio(s):
    v = _positive_float(s)
    if v > 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {s}")
    return v


def _fold_count(s):
    v = _positive_int(s)
    if v < 2:
        raise argparse.ArgumentTypeError("need at least 2 folds")
    return v


def _jobs(s):
    v = int(s)
    if v == 0:
        raise argparse.ArgumentTypeError("--jobs must be nonzero (negative counts back from all cores)")
    return v


def _int_list(s):
    try:
        vals = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return vals


def _exponent_range(s):
    """``"-8:2"`` -> powers of two 2^-8 ... 2^2; a single number is one exponent."""
    try:
        lo, _, hi = s.partition(":")
        lo = int(lo)
        hi = int(hi) if hi else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI exponents, got {s!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty exponent range {s!r}")
    return tuple(2.0 ** i for i in range(lo, hi + 1))


def _int_range(s):
    try:
        lo, _, hi = s.partition(":")
        lo = int(lo)
        hi = int(hi) if hi else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {s!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {s!r}")
    return tuple(range(lo, hi + 1))


# ---------------------------------------------------------------- parser

def _add_data(p, required=True):
    p.add_argument("--data", required=required, help="CSV file with one label column")
    p.add_argument("--label-column", default="0", help="label column index or header name (default 0)")
    p.add_argument("--label-map", default=None, help='raw label to +-1, e.g. "M:1,B:-1"')


def _add_model(p):
    p.add_argument("--algo", choices=("tsvm", "wltsvm", "rknn"), default="rknn")
    p.add_argument("--knn", choices=("fsa", "ldmdba"), default="fsa")
    p.add_argument("--c1", type=_positive_float, default=1.0)
    p.add_argument("--c2", type=_positive_float, default=1.0)
    p.add_argument("--c3", type=_positive_float, default=None, help="defaults to --c2")
    p.add_argument("--c", type=_positive_float, default=None, help="single WLTSVM penalty (defaults to --c1)")
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--kernel", choices=("linear", "gaussian"), default="linear")
    p.add_argument("--sigma", type=_positive_float, default=1.0)
    p.add_argument("--rect-ratio", type=_ratio, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rknn-tsvm", description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a model and write it to --out")
    _add_data(p)
    _add_model(p)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    p.add_argument("--model", required=True)
    _add_data(p)
    p.add_argument("--out", default=None, help="optional CSV of per-row predictions")

    p = sub.add_parser("cv", help="stratified k-fold cross-validation at fixed parameters")
    _add_data(p)
    _add_model(p)
    p.add_argument("--folds", type=_fold_count, default=5)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=None)

    p = sub.add_parser("gridsearch", help="exhaustive parameter search with k-fold CV")
    _add_data(p)
    _add_model(p)
    p.add_argument("--folds", type=_fold_count, default=5)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--jobs", type=_jobs, default=1)
    p.add_argument("--penalties", type=_exponent_range, default=GridSpec().penalty_range,
                   help="power-of-two exponents LO:HI (default -8:2)")
    p.add_argument("--sigmas", type=_exponent_range, default=GridSpec().sigma_range,
                   help="power-of-two exponents LO:HI (default -10:2)")
    p.add_argument("--ks", type=_int_range, default=GridSpec().k_range, help="LO:HI (default 2:15)")
    p.add_argument("--untie-c3", action="store_true", help="search c3 separately from c2")
    p.add_argument("--name", default=None, help="dataset label for the results table")
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench", help="training-time scaling on generated 32-feature mixtures")
    p.add_argument("--sizes", type=_int_list, default=[1000, 2000, 5000])
    p.add_argument("--dims", type=_positive_int, default=32)
    p.add_argument("--kernel", choices=("linear", "gaussian"), default="gaussian")
    p.add_argument("--rect-ratio", type=_ratio, default=None,
                   help="basis fraction for the kernel (default 0.1 gaussian, 1 linear)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=None)

    p = sub.add_parser("gen", help="write a generated dataset")
    p.add_argument("kind", choices=("checkerboard", "mixture"))
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--cells", type=_positive_int, default=4)
    p.add_argument("--n-test", type=_positive_int, default=None, help="mixture test size (default n/10)")
    p.add_argument("--dims", type=_positive_int, default=32)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", required=True, help="output CSV (mixture also writes <stem>_test.csv)")

    p = sub.add_parser("diag", help="dump neighbour lists, sample weights and margin flags")
    _add_data(p)
    p.add_argument("--knn", choices=("fsa", "ldmdba"), default="fsa")
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--kernel", choices=("linear", "gaussian"), default="linear")
    p.add_argument("--sigma", type=_positive_float, default=1.0)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", required=True, help="output directory")
    return ap


# ---------------------------------------------------------------- helpers

def _load(args) -> Dataset:
    col = args.label_column
    col = int(col) if col.lstrip("-").isdigit() else col
    return load_csv(args.data, label_column=col, label_map=parse_label_map(args.label_map))


def _kernel(args):
    return LINEAR if args.kernel == "linear" else gaussian(args.sigma)


def _hyper(args) -> HyperParams:
    c1 = args.c1
    if args.algo == "wltsvm" and args.c is not None:
        c1 = args.c
    return HyperParams(c1=c1, c2=args.c2, c3=args.c3, k=args.k, kernel=_kernel(args),
                       knn_algorithm=args.knn, rect_ratio=args.rect_ratio, seed=args.seed)


def _check_k(args, ds: Dataset):
    if args.algo != "tsvm" and args.k >= ds.n:
        raise CliError(f"--k {args.k} must be smaller than the number of samples ({ds.n})")


# ---------------------------------------------------------------- commands

def cmd_train(args) -> int:
    ds = _load(args)
    _check_k(args, ds)
    hp = _hyper(args)
    model = Classifier(args.algo, hp).fit(normalize_minmax(ds))
    save_model(model, args.out)
    info = model.info
    print(f"trained {args.algo} ({model.kind}) on {ds.n} samples: "
          f"train_time={fmt(info['train_time'])}s "
          f"margin_pos={info['margin_count_pos']} margin_neg={info['margin_count_neg']} "
          f"iterations={info['iterations_1']},{info['iterations_2']} -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    ds = _load(args)
    pred = predict(model, ds.samples)
    if args.out:
        dv = decision_values(model, ds.samples)
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["row", "label", "prediction", "dist_pos", "dist_neg"])
            for i, (y, p, (a, b)) in enumerate(zip(ds.labels, pred, dv)):
                w.writerow([i, int(y), int(p), fmt(a), fmt(b)])
    print(f"accuracy={fmt(accuracy(model, ds))}% on {ds.n} samples")
    return 0


def cmd_cv(args) -> int:
    ds = _load(args)
    _check_k(args, ds)
    hp = _hyper(args)
    res = cross_validate(Classifier(args.algo, hp), ds, stratified_folds(ds, args.folds, args.seed))
    name = Path(args.data).stem
    print(f"{name} {args.algo}: {res.mean_accuracy:.2f}±{res.std_accuracy:.2f}% "
          f"train_time={fmt(res.mean_train_time)}s ({params_label(hp, args.algo)})")
    if args.out:
        write_accuracy_table([(name, args.algo, args.algo, res)], args.out)
    return 0


def cmd_gridsearch(args) -> int:
    ds = _load(args)
    grid = GridSpec(args.penalties, args.sigmas, args.ks, tie_c2_c3=not args.untie_c3)
    if args.algo != "tsvm" and max(grid.k_range) >= ds.n:
        raise CliError(f"k range reaches {max(grid.k_range)} but the data has only {ds.n} samples")
    base = _hyper(args)
    folds = stratified_folds(ds, args.folds, args.seed)
    size = grid.size(args.algo, args.kernel)
    print(f"evaluating {size} grid points x {args.folds} folds", file=sys.stderr)
    best = grid_search(ds, grid, folds, args.algo, args.kernel, base, jobs=args.jobs)
    name = args.name or Path(args.data).stem
    print(f"{name} {args.algo}: {best.mean_accuracy:.2f}±{best.std_accuracy:.2f}% "
          f"train_time={fmt(best.mean_train_time)}s best=({params_label(best.best_params, args.algo)})")
    if args.out:
        write_accuracy_table([(name, args.algo, args.algo, best)], args.out)
    return 0


def cmd_bench(args) -> int:
    kernel = LINEAR if args.kernel == "linear" else gaussian(BENCH_SIGMA)
    ratio = args.rect_ratio if args.rect_ratio is not None else (1.0 if kernel.is_linear else 0.1)
    rows = run_bench(args.sizes, args.dims, kernel, ratio, args.seed)
    print("dataset,n,algorithm,train_time,test_accuracy,speedup")
    for r in rows:
        print(",".join(fmt(r[c]) for c in ("dataset", "n", "algorithm", "train_time", "test_accuracy", "speedup")))
    if args.out:
        write_bench_table(rows, args.out)
    return 0


def cmd_gen(args) -> int:
    out = Path(args.out)
    if args.kind == "checkerboard":
        if args.cells < 2:
            raise CliError("--cells must be at least 2")
        ds = gen_checkerboard(args.n, args.cells, args.seed)
        save_csv(ds, out)
        print(f"wrote {ds.n} rows x {ds.d} features -> {out}")
        return 0
    n_test = args.n_test or max(1, args.n // 10)
    train, test = gen_two_gaussian_mixture(args.n, n_test, args.dims, args.separation, args.seed)
    test_path = out.with_name(out.stem + "_test" + (out.suffix or ".csv"))
    save_csv(train, out)
    save_csv(test, test_path)
    print(f"wrote {train.n} training rows -> {out}, {test.n} test rows -> {test_path}")
    return 0


def cmd_diag(args) -> int:
    ds = normalize_minmax(_load(args))
    if args.k >= ds.n:
        raise CliError(f"--k {args.k} must be smaller than the number of samples ({ds.n})")
    space = None if args.kernel == "linear" else gaussian(args.sigma)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    index = find_neighbors(ds.samples, args.k, args.knn, space)
    index.to_csv(out / "neighbors.csv")
    pos, neg = class_affinities(index, ds.labels)
    pos.to_csv(out / "weights_pos.csv", "weights")
    neg.to_csv(out / "weights_neg.csv", "weights")
    # pos carries the flags of the -1 samples and vice versa
    pos.to_csv(out / "margin_neg.csv", "flags")
    neg.to_csv(out / "margin_pos.csv", "flags")
    line = (f"n={ds.n} k={args.k} knn={args.knn} margin_pos={neg.margin_count}/{ds.n_pos} "
            f"margin_neg={pos.margin_count}/{ds.n_neg}")
    if args.knn == "ldmdba" and ds.n >= 3:
        line += f" recall_vs_fsa={fmt(knn_recall(index, find_neighbors(ds.samples, args.k, 'fsa', space)))}"
    print(line + f" -> {out}")
    return 0


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "cv": cmd_cv, "gridsearch": cmd_gridsearch,
            "bench": cmd_bench, "gen": cmd_gen, "diag": cmd_diag}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, RuntimeError, CliError) as exc:
        print(f"rknn-tsvm {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
