"""Time the numba and numpy kernel paths on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Every timed call is checked for identical output across the two paths.
The first numba call per kernel is a warm-up (JIT or cache load) and is
reported separately.
"""
import argparse
import time

import numpy as np

from bfree import kernels, make_order
from bfree.geometry import folner_box, segment_box
from bfree.ring_algebra import PrimePowerSpec, build_bfamily
from bfree.sieve_measure import ideal_matrix, sieve_window


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(scale):
    Z = make_order([0, 1])
    G = make_order([1, 0, 1], maximal=True)
    n = int(10**6 * scale)
    sq = build_bfamily(Z, PrimePowerSpec(2, 10**8))
    gf = build_bfamily(G, PrimePowerSpec(2, 10**8), assume_maximal=True)
    w1 = sieve_window(sq, segment_box(1, 0, n))
    w2 = sieve_window(gf, folner_box(2, int(700 * scale**0.5)))
    rng = np.random.default_rng(0)
    pts = rng.integers(-10**6, 10**6, (n, 2))
    H = ideal_matrix(gf.ideals[-1])
    masks = rng.integers(0, 1 << 8, (3, 20)).astype(np.int64)

    def mark(kb, fam, box):
        def run():
            bits = np.ones(box.size, np.uint8)
            for b in fam.ideals:
                kb.mark_lattice(bits, np.array(box.lo), np.array(box.shape), ideal_matrix(b), np.zeros(box.dim, np.int64))
            return bits
        return run

    return {
        "mark_lattice 1d (1229 ideals)": lambda kb: mark(kb, sq, w1.box),
        "mark_lattice 2d (1232 ideals)": lambda kb: mark(kb, gf, w2.box),
        "pattern_histogram 1d, 3 offsets": lambda kb: lambda: kb.pattern_histogram(w1.bits, np.array(w1.box.shape), np.array([[0], [1], [2]])),
        "pattern_histogram 2d, 4 offsets": lambda kb: lambda: kb.pattern_histogram(
            w2.bits, np.array(w2.box.shape), np.array([[0, 0], [1, 0], [0, 1], [1, 1]])),
        "zero_windows 1d, extent 3": lambda kb: lambda: kb.zero_windows(w1.bits, w1.box.shape, (3,)),
        "zero_windows 2d, extent 2x2": lambda kb: lambda: kb.zero_windows(w2.bits, w2.box.shape, (2, 2)),
        "residue_indices 2d": lambda kb: lambda: kb.residue_indices(pts, H),
        "brute_count 20 points": lambda kb: lambda: kb.brute_count(20, masks, [8, 8, 8], [7, 7, 7]),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplies the problem sizes")
    args = ap.parse_args(argv)

    print(f"{'kernel':34s} {'numba warm-up':>14s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, make in cases(args.scale).items():
        nb, npy = make(kernels.NUMBA), make(kernels.NUMPY)
        t0 = time.perf_counter()
        nb()
        warm = time.perf_counter() - t0
        t_nb, out_nb = best_of(nb, args.repeat)
        t_np, out_np = best_of(npy, args.repeat)
        same = np.array_equal(np.asarray(out_nb), np.asarray(out_np))
        if not same:
            raise SystemExit(f"{name}: the two paths disagree")
        print(f"{name:34s} {warm:14.4f} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.2f}x")


if __name__ == "__main__":
    main()
