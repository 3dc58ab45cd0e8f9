"""Compare the numba and numpy propagation kernels.

    python benchmarks/bench_kernels.py [--repeat 20]

Times the three workloads that dominate the package: a full gate
propagator, a sampled trajectory and chaining an RB sequence. Prints the
median wall time per call and the largest disagreement between backends.
"""

import argparse
import statistics
import time

import numpy as np

from sagqg import _kernels
from sagqg.schedule import build_schedule, pauli_x


def _workloads(rng):
    sched = build_schedule(pauli_x())
    bounds = sched.segment_boundaries
    n = 4 * 256
    t = np.concatenate([np.linspace(a, b, 257)[:-1] + (b - a) / 512 for a, b in zip(bounds[:-1], bounds[1:])])
    amp, phase, det = sched.played_fields(t)
    hx, hy, hz = np.pi * amp * np.cos(phase), np.pi * amp * np.sin(phase), np.pi * det
    dt = np.full(n, sched.total_time / n)
    counts = np.full(128, n // 128, dtype=np.int64)
    psi0 = np.array([1, 0], dtype=np.complex128)
    table = _kernels.NUMPY.steps(*rng.normal(size=(3, 16)), 0.1)
    idx = rng.integers(0, 16, size=200)
    return {
        "gate propagator (1024 steps)": (lambda k: k.propagate(hx, hy, hz, dt)),
        "trajectory (1024 steps, 128 samples)": (lambda k: k.evolve(hx, hy, hz, dt, counts, psi0)),
        "RB chain (200 gates)": (lambda k: k.chain(table, idx)),
    }


def _time(fn, repeat):
    fn()  # warm-up, includes JIT compilation for numba
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    backends = [_kernels.NUMPY] + ([_kernels.NUMBA] if _kernels.NUMBA is not None else [])
    print(f"{'workload':40s} " + " ".join(f"{b.name:>12s}" for b in backends) + "   speedup   max|diff|")
    for name, work in _workloads(rng).items():
        times = [_time(lambda b=b: work(b), args.repeat) for b in backends]
        results = [np.asarray(work(b)) for b in backends]
        diff = max(float(np.max(np.abs(r - results[0]))) for r in results)
        speedup = times[0] / times[-1]
        print(f"{name:40s} " + " ".join(f"{1e6 * t:10.1f}us" for t in times) + f"   {speedup:6.1f}x   {diff:.1e}")


if __name__ == "__main__":
    main()
