"""Compare the numba and numpy fixed-point kernels on the same programs.

    python benchmarks/bench_kernels.py [--repeat 3]

Each backend runs the identical compiled program; results are checked to be
bit-identical before timings are printed.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from afasim import _kernels
from afasim.encoding import bits_oracle, build_combined
from afasim.fixedpoint import _encode_vector
from afasim.powereq import build_powereq, member_string


def cases():
    pm = build_powereq(25).machine
    cm = build_combined(bits_oracle("101100111010")).machine
    yield "powereq exact, member n=4", pm, member_string(4)
    yield "combined float128, member n=2", cm, member_string(2)
    yield "combined float128, member n=3", cm, member_string(3)


def time_backend(fn, prog, codes, v0, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(prog.indptr, prog.indices, prog.data, codes, v0, prog.frac, False)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1

    print(f"{'case':34} {'steps':>6} {'numba s':>9} {'numpy s':>9} {'speedup':>8}")
    for label, machine, word in cases():
        prog = machine.program
        codes = prog.encode(word)
        start = [0] * machine.dim
        start[machine.initial] = 1 << prog.scale_bits
        # enough integer limbs that neither backend needs to widen
        v0 = _encode_vector(start, prog.frac + 4)
        _kernels.run_numba(prog.indptr, prog.indices, prog.data, codes[:2], v0, prog.frac, False)  # warm up
        t_fast, a = time_backend(_kernels.run_numba, prog, codes, v0, args.repeat)
        t_slow, b = time_backend(_kernels.run_numpy, prog, codes, v0, max(1, args.repeat // 3))
        if a[0] != b[0] or not np.array_equal(a[1], b[1]):
            print(f"{label}: backends disagree")
            return 1
        print(f"{label:34} {len(codes):6d} {t_fast:9.4f} {t_slow:9.4f} {t_slow / t_fast:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
