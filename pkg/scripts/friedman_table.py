"""Average ranks, Friedman statistics and win/draw/loss from the published accuracy table.

Columns: TSVM, WLTSVM, KNN-STSVM, RKNN-TSVM(FSA), RKNN-TSVM(LDMDBA).
"""
import numpy as np

from rknn_tsvm.evaluation import friedman_test, rank_table, win_draw_loss

METHODS = ("TSVM", "WLTSVM", "KNN-STSVM", "RKNN-FSA", "RKNN-LDMDBA")
DATASETS = ("Australian", "Heart", "Bupa", "WPBC", "WDBC", "Hepatitis", "Ionosphere", "Haberman",
            "Pima", "Fertility", "Votes")
ACCURACY = np.array([
    [87.10, 87.39, 86.52, 87.54, 87.97],
    [84.81, 85.93, 83.70, 85.93, 85.56],
    [74.78, 73.62, 73.91, 73.91, 73.91],
    [79.27, 78.81, 78.82, 80.29, 80.32],
    [98.24, 98.24, 97.54, 98.59, 98.59],
    [85.81, 87.10, 85.16, 87.74, 88.39],
    [90.89, 92.02, 92.60, 93.73, 93.17],
    [75.46, 75.82, 76.11, 76.77, 76.79],
    [78.65, 78.26, 77.22, 78.78, 78.91],
    [88.00, 89.00, 88.00, 90.00, 91.00],
    [96.55, 97.01, 96.55, 97.01, 97.01],
])


def main():
    ranks = rank_table(ACCURACY)
    print(f"{'':>11}" + "".join(f"{m:>13}" for m in METHODS))
    for name, row in zip(DATASETS, ranks):
        print(f"{name:>11}" + "".join(f"{r:>13g}" for r in row))
    print(f"{'mean':>11}" + "".join(f"{r:>13.3f}" for r in ranks.mean(axis=0)))
    chi, f = friedman_test(ranks)
    print(f"\nFriedman chi2 = {chi:.3f}, F = {f:.3f}")
    wdl = win_draw_loss(dict(zip(METHODS, ACCURACY.T)))
    print("\nRKNN-LDMDBA vs others (win/draw/loss):")
    for other in METHODS[:-1]:
        print(f"  {other:>11}: {'/'.join(map(str, wdl[('RKNN-LDMDBA', other)]))}")


if __name__ == "__main__":
    main()
