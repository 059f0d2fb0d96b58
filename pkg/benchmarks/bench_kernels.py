"""Compare the numba and numpy kernels on full enumerations.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends must produce identical tables; timings exclude JIT compilation
(one warm-up call per kernel).
"""
import argparse
import time

import numpy as np

from groupfair import kernels
from groupfair.model import ADDITIVE, BUNDLE, group_sum_matrix, group_tables, iter_blocks, random_instance

CASES = [(3, 6, ADDITIVE), (4, 6, ADDITIVE), (4, 7, BUNDLE), (5, 6, ADDITIVE)]


def _best(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench(n, m, kind, repeat):
    inst = random_instance(n, m, kind, 10, 0)
    tab, cnt, _ = group_tables(n)
    cubes = [cube for _, _, cube in iter_blocks(inst)]
    k = max(1, n // 2)
    sums = np.concatenate([group_sum_matrix(inst, c, k) for c in cubes])

    kernels.gef_matrix_nb(cubes[0][:2], tab, cnt, 1, 1)
    kernels.gpe_holds_nb(sums[:2], 1, 1)

    rows = []
    t_nb, a = _best(lambda: [kernels.gef_matrix_nb(c, tab, cnt, 1, 1) for c in cubes], repeat)
    t_np, b = _best(lambda: [kernels.gef_matrix_np(c, tab, cnt, 1, 1) for c in cubes], repeat)
    assert all((x == y).all() for x, y in zip(a, b))
    rows.append(("gef_matrix", t_nb, t_np))
    t_nb, a = _best(lambda: kernels.gpe_holds_nb(sums, 1, 1), repeat)
    t_np, b = _best(lambda: kernels.gpe_holds_np(sums, 1, 1), repeat)
    assert (np.asarray(a) == np.asarray(b)).all()
    rows.append((f"gpe_holds k={k}", t_nb, t_np))
    return inst.size, rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'case':<22}{'kernel':<16}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    for n, m, kind in CASES:
        size, rows = bench(n, m, kind, args.repeat)
        for name, t_nb, t_np in rows:
            label = f"n={n} m={m} {kind} ({size})"
            print(f"{label:<22}{name:<16}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
