"""Training-time scaling on generated 32-feature two-Gaussian mixtures.

Writes one CSV row per size per algorithm and prints the FSA/LDMDBA speedups.
"""
import argparse

from rknn_tsvm.evaluation import run_bench, write_bench_table
from rknn_tsvm.kernel import LINEAR, gaussian


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="1000,2000,5000,10000")
    ap.add_argument("--kernel", choices=("gaussian", "linear"), default="gaussian")
    ap.add_argument("--rect-ratio", type=float, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="ndc_scaling.csv")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    kernel = gaussian(2.0 ** -15) if args.kernel == "gaussian" else LINEAR
    ratio = args.rect_ratio if args.rect_ratio is not None else (0.1 if args.kernel == "gaussian" else 1.0)
    rows = run_bench(sizes, 32, kernel, ratio, args.seed)
    write_bench_table(rows, args.out)
    for r in rows:
        print(f"{r['dataset']:>14} {r['algorithm']:>12} {r['train_time']:9.3f} s  "
              f"acc {r['test_accuracy']:6.2f}%  fsa/this {r['speedup']:.2f}")


if __name__ == "__main__":
    main()
