"""Time the compiled and numpy kernel backends on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per (kernel, backend) with the best wall time and the
speed-up of the compiled backend. Outputs of both backends are checked for
equality before timing.
"""

import argparse
import timeit

import numpy as np

from minhashlaw import kernels
from minhashlaw.exactlaw import all_permutations, order_patterns
from minhashlaw.hashing import permutation_values
from minhashlaw.itemsets import Universe, build_rum_matrix


def workloads():
    rng = np.random.default_rng(0)
    u = Universe.of_size(6)
    m = build_rum_matrix(u.itemset([1, 2, 3]), u.itemset([3, 4, 5, 6]))
    g1, g2, _ = order_patterns(m, 1, 2)
    perms = all_permutations(m.n_rows) + 1

    n_sim, trials, k = 40, 32_768, 5
    z_sim = permutation_values(rng, (trials, k), n_sim)
    h1 = (rng.random((trials, n_sim)) < 0.5).astype(np.uint8)
    h2 = (rng.random((trials, n_sim)) < 0.5).astype(np.uint8)

    n_big = 100_000
    z_big = permutation_values(rng, (5,), n_big).T.copy()
    members = (rng.random(n_big) < 0.5).astype(np.uint8)
    xs = rng.integers(1, n_big + 1, size=5)
    ys = rng.integers(1, n_big + 1, size=5)

    z_dis = permutation_values(rng, (20_000, 3), 12)
    return {
        "agreement (210 patterns x 5040 perms)": ("agreement", (g1, g2, perms, m.n_rows + 1, False)),
        "match_counts (32768 trials, k=5, n=40)": ("match_counts", (h1, h2, z_sim, n_sim + 1, False)),
        "column_extreme (n=1e5, k=5)": ("column_extreme", (z_big, members, n_big + 1, False)),
        "linear_hash (n=1e5, k=5)": ("linear_hash", (xs, ys, n_big)),
        "rows_disjoint (20000 draws, k=3, n=12)": ("rows_disjoint", (z_dis,)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(backends)} (default {kernels.BACKEND})")
    for label, (name, fargs) in workloads().items():
        fn = getattr(kernels, name)
        outs = {b: fn(*fargs, backend=b) for b in backends}
        ref = outs[backends[0]]
        assert all(np.array_equal(ref, o) for o in outs.values()), f"backends disagree on {name}"
        times = {}
        for b in backends:
            times[b] = min(timeit.repeat(lambda: fn(*fargs, backend=b), number=1, repeat=args.repeat))
        line = "  ".join(f"{b}={times[b] * 1e3:9.2f} ms" for b in backends)
        if "cython" in times:
            line += f"  speed-up x{times['python'] / times['cython']:.1f}"
        print(f"{label:44s} {line}")


if __name__ == "__main__":
    main()
