"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n-cells 256] [--repeat 5]

Prints one line per kernel with the best-of-N time of each backend and the
speedup, and checks that both backends agree on the outputs.
"""

import argparse
import math
import sys
import timeit

import numpy as np

from nematic_or import _pykernels

try:
    from nematic_or import _ckernels
except ImportError:
    _ckernels = None


def _state(n_cells, seed=0):
    rng = np.random.default_rng(seed)
    y = (2.0 * np.arange(n_cells + 1) - n_cells) / n_cells
    q11 = 0.5 * np.cos(0.5 * math.pi * y) + 0.01 * rng.standard_normal(y.size)
    q12 = 0.5 * np.sin(0.5 * math.pi * y) + 0.01 * rng.standard_normal(y.size)
    u = 0.5 * (1.0 - y * y)
    return q11, q12, u, 2.0 / n_cells


def cases(n_cells):
    q11, q12, u, h = _state(n_cells)
    y = (2.0 * np.arange(n_cells + 1) - n_cells) / n_cells
    lin11 = np.zeros_like(y)
    lin12 = 0.5 * y
    return {
        "residual": lambda k: k.residual(q11, q12, u, h, 1e3, -1.0, 1e-3, 3.0, True),
        "jacobian_band": lambda k: k.jacobian_band(q11, q12, u, h, 1e3, -1.0, 1e-3, 3.0, True),
        "frozen_band": lambda k: k.frozen_band(q11, q12, u, h, 1e3, 1e-3, 3.0, 1e-3, 1e-3, True),
        "relax_cf (eps=10, 1e-6)": lambda k: k.relax_cf(lin11, lin12, h, 10.0, 1e-3, 1e-6, 100_000),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.shape == b.shape and np.allclose(a, b, rtol=1e-10, atol=1e-9)
    return a == b


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-cells", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
        return 1
    print(f"n_cells = {args.n_cells}, best of {args.repeat}")
    print(f"{'kernel':<26}{'python [ms]':>12}{'cython [ms]':>13}{'speedup':>9}  agree")
    ok = True
    for name, fn in cases(args.n_cells).items():
        agree = _same(fn(_pykernels), fn(_ckernels))
        ok &= agree
        times = []
        for k in (_pykernels, _ckernels):
            t = timeit.Timer(lambda: fn(k))
            number, _ = t.autorange()
            times.append(min(t.repeat(args.repeat, number)) / number * 1e3)
        print(f"{name:<26}{times[0]:>12.3f}{times[1]:>13.3f}{times[0] / times[1]:>8.1f}x  {'yes' if agree else 'NO'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
