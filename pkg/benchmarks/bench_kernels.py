"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from disscalc import _kernels_py as numpy_backend
from disscalc.kernels import compiled


def cases():
    rng = np.random.default_rng(0)
    for N in (256, 1024, 4096):
        J = 2 * N + 1
        theta = 0.37
        u = np.exp(2j * np.pi * theta * np.arange(-N, N + 1))
        du = 2j * np.pi * theta * u
        Y = rng.normal(size=(J, 16)) + 1j * rng.normal(size=(J, 16))
        yield f"loewner_apply J={J} m=16", "loewner_apply", (u, du, Y)
    x = rng.uniform(-10, 10, 100)
    for N in (1024, 10_000):
        yield f"cardinal_sumsq P=100 N={N}", "cardinal_sumsq", (x, 1.0, N)
    z = rng.uniform(-5, 5, 16) + 1j * rng.uniform(0, 1, 16)
    yield "cardinal_values P=16 N=2048", "cardinal_values", (z, 1.0, 2048)


def best_ms(fn, args, repeat):
    t = timeit.Timer(lambda: fn(*args))
    number, _ = t.autorange()
    return 1e3 * min(t.repeat(repeat, number)) / number


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    repeat = ap.parse_args().repeat
    if compiled is None:
        print("compiled extension not available; only the numpy backend can run")
    print(f"{'case':34s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s} {'max diff':>9s}")
    for label, name, args in cases():
        ref = getattr(numpy_backend, name)
        t_py = best_ms(ref, args, repeat)
        if compiled is None:
            print(f"{label:34s} {t_py:10.3f}")
            continue
        fast = getattr(compiled, name)
        t_c = best_ms(fast, args, repeat)
        diff = np.max(np.abs(np.asarray(fast(*args)) - np.asarray(ref(*args))))
        print(f"{label:34s} {t_py:10.3f} {t_c:10.3f} {t_py / t_c:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
