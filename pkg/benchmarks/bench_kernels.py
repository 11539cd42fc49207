"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import timeit

import numpy as np

from optratchet import _purepy

try:
    from optratchet import _kernels
except ImportError:
    _kernels = None


def _cases(module):
    n = 81
    amps = np.zeros((2, n), dtype=complex)
    amps[:, 40] = 1.0
    amps[:, 41] = np.exp(0.645j)
    detuning = 0.73 * np.arange(-40, 41)
    return {
        "bessel_table(60, 5.48) x200": lambda: [module.bessel_table(60, 5.4795) for _ in range(200)],
        "bessel_table(2000, 1500.0)": lambda: module.bessel_table(2000, 1500.0),
        "rk4_evolve 2x81 sites, 20000 steps": lambda: module.rk4_evolve(amps, detuning, 1.0, 1e-3, 20000),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    py_cases = _cases(_purepy)
    cy_cases = _cases(_kernels) if _kernels is not None else {}
    print(f"{'kernel':40s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for name, fn in py_cases.items():
        t_py = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        if name in cy_cases:
            t_cy = min(timeit.repeat(cy_cases[name], number=1, repeat=args.repeat))
            print(f"{name:40s} {t_py:12.4f} {t_cy:12.4f} {t_py / t_cy:8.1f}x")
        else:
            print(f"{name:40s} {t_py:12.4f} {'n/a':>12s} {'':>9s}")


if __name__ == "__main__":
    main()
