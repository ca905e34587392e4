"""Compare the compiled and pure-Python kernels on the two hot loops.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""

import argparse
import time

import numpy as np

from permlab import available_backends
from permlab.permanent import permanent_ryser
from permlab.tables import block_permanent_ratio


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        times.append(time.perf_counter() - t0)
    return min(times), value


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    ryser_sizes = (12, 16) if args.quick else (16, 20)
    table_sizes = (20, 30) if args.quick else (40, 80)
    cases = []
    for n in ryser_sizes:
        a = rng.uniform(0.1, 1.0, size=(n, n))
        cases.append((f"ryser n={n}", lambda be, a=a: permanent_ryser(a, backend=be)))
    b = rng.uniform(0.2, 3.0, size=(3, 3))
    for n in table_sizes:
        cases.append((f"tables m=3 n={n}",
                      lambda be, n=n: block_permanent_ratio(b, n, backend=be).log_ratio))

    backends = available_backends()
    print(f"{'case':<20}" + "".join(f"{be:>14}" for be in backends) + f"{'speedup':>10}")
    for name, fn in cases:
        timings, values = [], []
        for be in backends:
            t, v = best_of(lambda: fn(be), args.repeat)
            timings.append(t)
            values.append(v)
        spread = max(values) - min(values)
        speedup = timings[-1] / timings[0] if len(timings) > 1 else 1.0
        print(f"{name:<20}" + "".join(f"{t:>13.4f}s" for t in timings)
              + f"{speedup:>9.1f}x  (values agree to {spread:.1e})")


if __name__ == "__main__":
    main()
