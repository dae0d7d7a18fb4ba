"""Compare the compiled and numpy kernel backends.

Times ``contract_power`` and ``complement_apply`` over a grid of (m, n), then
one full LD-LEQA solve per size with each backend patched in. Prints a plain
table; run with ``python3 benchmarks/bench_kernels.py [--repeat R]``.
"""
import argparse
import timeit

import numpy as np

from mtcp import kernels
from mtcp.problems import GeneratorSpec, generate
from mtcp.solver import SolverConfig, ld_leqa

SIZES = [(2, 200), (3, 10), (3, 50), (3, 200), (4, 10), (4, 50), (5, 10), (5, 20), (6, 10)]


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_table(backends, repeat):
    print(f"{'kernel':<18}{'m':>3}{'n':>6}" + "".join(f"{b + ' (s)':>16}" for b in backends) + f"{'speedup':>10}")
    rng = np.random.default_rng(0)
    for m, n in SIZES:
        entries = rng.random(n**m)
        x = rng.random(n)
        for name in ("contract_power", "complement_apply"):
            times = [
                best_time(lambda f=getattr(kernels.get_backend(b), name): f(entries, m, n, x), repeat)
                for b in backends
            ]
            speed = f"{times[-1] / times[0]:>10.1f}" if len(times) == 2 else ""
            print(f"{name:<18}{m:>3}{n:>6}" + "".join(f"{t:>16.3e}" for t in times) + speed)


def solve_table(backends, repeat):
    print(f"\n{'full LD-LEQA solve':<18}{'m':>3}{'n':>6}" + "".join(f"{b + ' (s)':>16}" for b in backends))
    for m, n in [(3, 10), (3, 50), (4, 20), (5, 10)]:
        p = generate(GeneratorSpec("P1", m, n, seed=1))
        cfg = SolverConfig(alpha=1.0)
        times = []
        for b in backends:
            impl = kernels.get_backend(b)
            saved = kernels.contract_power, kernels.complement_apply
            kernels.contract_power, kernels.complement_apply = impl.contract_power, impl.complement_apply
            try:
                times.append(best_time(lambda: ld_leqa(p, cfg), repeat))
            finally:
                kernels.contract_power, kernels.complement_apply = saved
        print(f"{'':<18}{m:>3}{n:>6}" + "".join(f"{t:>16.3e}" for t in times))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default: {kernels.BACKEND})\n")
    kernel_table(backends, args.repeat)
    solve_table(backends, args.repeat)


if __name__ == "__main__":
    main()
