"""Benchmark the compiled kernel backend against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Shapes mirror the training workload: conv layers over padded (batch, 50, 28)
feature windows and the LSTM recurrence at hidden size 64.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from shotintent._kernels import _reference  # noqa: E402

try:
    from shotintent._kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, repeats):
    fn()  # warm up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_conv(impl, rng, repeats):
    x = rng.normal(size=(32, 50, 28))
    w = rng.normal(size=(32, 28, 5))
    b = rng.normal(size=32)
    fwd = timeit(lambda: impl.conv1d_forward(x, w, b), repeats)
    dy = rng.normal(size=(32, 46, 32))
    bwd = timeit(lambda: impl.conv1d_backward(x, w, dy), repeats)
    return fwd, bwd


def bench_lstm(impl, rng, repeats):
    B, T, H = 32, 50, 64
    gates_pre = rng.normal(size=(B, T, 4 * H))
    lengths = rng.integers(30, T + 1, size=B)
    wh = rng.normal(size=(H, 4 * H)) * 0.3
    fwd = timeit(lambda: impl.lstm_forward(gates_pre, lengths, wh), repeats)
    _, cache = impl.lstm_forward(gates_pre, lengths, wh)
    dhl = rng.normal(size=(B, H))
    bwd = timeit(lambda: impl.lstm_backward(cache, wh, dhl), repeats)
    return fwd, bwd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    backends = [("reference (numpy)", _reference)]
    if _fast is not None:
        backends.append(("fast (compiled)", _fast))
    else:
        print("compiled backend not built; run `python setup.py build_ext --inplace`")

    results = {}
    for name, impl in backends:
        conv_f, conv_b = bench_conv(impl, rng, args.repeats)
        lstm_f, lstm_b = bench_lstm(impl, rng, args.repeats)
        results[name] = (conv_f, conv_b, lstm_f, lstm_b)

    header = f"{'backend':<20} {'conv fwd':>10} {'conv bwd':>10} {'lstm fwd':>10} {'lstm bwd':>10}"
    print(header)
    print("-" * len(header))
    for name, (cf, cb, lf, lb) in results.items():
        print(f"{name:<20} {cf * 1e3:>8.2f}ms {cb * 1e3:>8.2f}ms "
              f"{lf * 1e3:>8.2f}ms {lb * 1e3:>8.2f}ms")
    if len(results) == 2:
        ref = results["reference (numpy)"]
        fast = results["fast (compiled)"]
        speedups = [r / f for r, f in zip(ref, fast)]
        print(f"{'speedup':<20} " + " ".join(f"{s:>9.2f}x" for s in speedups))


if __name__ == "__main__":
    main()
