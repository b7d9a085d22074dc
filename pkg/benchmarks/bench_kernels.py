"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.
"""
import timeit

import numpy as np

from rotorqec import _kernels_py

try:
    from rotorqec import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    psi = rng.normal(size=64) + 1j * rng.normal(size=64)
    probs = rng.random(4096)
    p = rng.random(40)
    a = np.arange(40, dtype=float)
    x = np.linspace(-3, 3, 512)
    return {
        "apply_error_ket d=64": lambda m: m.apply_error_ket(psi, -3, 0.37),
        "modular_sector_weights n=4096": lambda m: m.modular_sector_weights(probs, 6),
        "phase_expectation_sum 40x512": lambda m: m.phase_expectation_sum(p, a, x),
    }


def main():
    rng = np.random.default_rng(0)
    mods = [("numpy", _kernels_py)] + ([("cython", _kernels)] if _kernels is not None else [])
    if _kernels is None:
        print("compiled kernels not built; timing the numpy fallback only")
    for name, fn in cases(rng).items():
        line = [f"{name:<32}"]
        for label, mod in mods:
            n, t = timeit.Timer(lambda: fn(mod)).autorange()
            line.append(f"{label} {1e6 * t / n:8.2f} us")
        print("  ".join(line))


if __name__ == "__main__":
    main()
