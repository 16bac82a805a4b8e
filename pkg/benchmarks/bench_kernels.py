"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is timed on
the same inputs under both backends and the outputs are checked to agree.
"""
import argparse
import sys
import timeit

import numpy as np

from spectraprg._backend import compiled_kernels, python_kernels
from spectraprg.gf2 import field_poly


def _inputs(rng, size):
    W = rng.standard_normal((size, 4, 4))
    mats = np.ascontiguousarray(W + W.transpose(0, 2, 1))
    coeffs = rng.integers(0, 1 << 16, size=(size, 8), dtype=np.uint64)
    points = np.arange(64, dtype=np.uint64)
    n, w, t, b, a = 64, 6, 8, 6, 6
    hc = rng.integers(0, 1 << b, size=(size, w), dtype=np.uint64)
    bc = rng.integers(0, 1 << a, size=(size, t, w), dtype=np.uint64)
    return {
        "batch_lambda_max (4x4)": lambda K: K.batch_lambda_max(mats),
        "poly_eval_batch (GF(2^16), deg 7, 64 pts)": lambda K: K.poly_eval_batch(coeffs, points, 16, field_poly(16)),
        "mz_expand_batch (n=64, t=8, w=6)": lambda K: K.mz_expand_batch(hc, bc, n, b, field_poly(b), a,
                                                                        field_poly(a), 3),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--size", type=int, default=20000, help="batch size per call")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    compiled = compiled_kernels()
    if compiled is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`", file=sys.stderr)
        return 1
    cases = _inputs(np.random.default_rng(0), args.size)
    print(f"{'kernel':45s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, call in cases.items():
        ref, out = call(python_kernels), call(compiled)
        if not np.allclose(np.asarray(ref, dtype=np.float64), np.asarray(out, dtype=np.float64), rtol=1e-9, atol=1e-9):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        tp = min(timeit.repeat(lambda: call(python_kernels), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: call(compiled), number=1, repeat=args.repeat))
        print(f"{name:45s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
