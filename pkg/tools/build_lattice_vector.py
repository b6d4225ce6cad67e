"""Regenerate ``lowdisc/data/lattice_vector.txt``.

Component-by-component construction of an embedded base-2 rank-1 lattice
generating vector for the unweighted (all weights 1) Korobov space with
smoothness alpha = 2. The squared worst-case error of the first 2^m points,

    e_m^2(z) = -1 + 2^-m sum_n prod_j (1 + 2 pi^2 B_2({n z_j / 2^m})),

is evaluated for every m in [M_MIN, M_MAX]; a candidate is scored by
max_m 4^m e_m^2(z), which roughly equalizes the O(N^-2) decay across sizes.
The first component is fixed to 1.

File layout: a header line with m_max, then one odd integer per line.
Runtime is a few minutes on one core.
"""

from pathlib import Path

import numpy as np

M_MAX = 16
M_MIN = 4
DIMS = 10


def main():
    N = 1 << M_MAX
    x = np.arange(N) / N
    omega = 2.0 * np.pi**2 * (x * x - x + 1.0 / 6.0)
    n = np.arange(N, dtype=np.int64)
    prod = 1.0 + omega[(n * 1) & (N - 1)]
    z = [1]
    candidates = np.arange(3, N // 2, 2, dtype=np.int64)
    chunk = 32
    for dim in range(1, DIMS):
        best_score, best_z = np.inf, None
        for start in range(0, len(candidates), chunk):
            cz = candidates[start : start + chunk]
            vals = prod[None, :] * (1.0 + omega[(n[None, :] * cz[:, None]) & (N - 1)])
            score = np.full(len(cz), -np.inf)
            for m in range(M_MIN, M_MAX + 1):
                stride = 1 << (M_MAX - m)
                e2 = vals[:, ::stride].mean(axis=1) - 1.0
                score = np.maximum(score, e2 * 4.0**m)
            i = int(np.argmin(score))
            if score[i] < best_score:
                best_score, best_z = score[i], int(cz[i])
        z.append(best_z)
        prod = prod * (1.0 + omega[(n * best_z) & (N - 1)])
        print(f"dim {dim + 1}: z = {best_z}  score = {best_score:.6g}", flush=True)
    out = Path(__file__).resolve().parents[1] / "src/mcmsurvey/lowdisc/data/lattice_vector.txt"
    out.write_text(f"{M_MAX}\n" + "\n".join(map(str, z)) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
