"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat R] [--scale S]
"""

import argparse
import timeit

import numpy as np

from optsample._kernels import _fallback

try:
    from optsample._kernels import _ckernels
except ImportError:
    _ckernels = None


def cases(scale, rng):
    n = 2000 * scale
    x = rng.random(n)
    coefs = rng.standard_normal(129) + 1j * rng.standard_normal(129)
    pts, vals = rng.random(200), rng.standard_normal(200) * 0.01
    q2, p2 = rng.random((n, 2)), rng.random((300, 2))
    cells = rng.random((5000 * scale, 2))
    return {
        "trig_poly_eval": lambda k: k.trig_poly_eval(x, -64, coefs),
        "circle_envelope": lambda k: k.circle_envelope(x, pts, vals),
        "min_distance": lambda k: k.min_distance(q2, p2),
        "cells_occupied": lambda k: k.cells_occupied(cells, np.zeros(2), 1.0, 16),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=int, default=1)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = [("python", _fallback)] + ([("compiled", _ckernels)] if _ckernels is not None else [])
    print(f"{'kernel':<18}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for name, fn in cases(args.scale, rng).items():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for _, mod in backends]
        speed = f"{times[0] / times[1]:>9.1f}x" if len(times) == 2 else ""
        print(f"{name:<18}" + "".join(f"{t * 1e3:>12.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
