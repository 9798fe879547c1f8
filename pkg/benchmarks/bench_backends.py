"""Compare the compiled statevector kernels against the numpy fallback.

Times individual kernels in-process (both modules imported side by side) and
whole noisy trajectories in subprocesses so each run sees a frozen backend
selection.  Usage:

    python3 benchmarks/bench_backends.py --qubits 20 --hops 56
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from hamsterwheel import _kernels_py

try:
    from hamsterwheel import _kernels
except ImportError:
    _kernels = None

TRAJECTORY_SNIPPET = """\
import time
import numpy as np
from hamsterwheel import protocol
from hamsterwheel.noise import NoiseModel

config = protocol.WheelConfig(
    num_qubits={qubits},
    hops={hops},
    correction_mode="dynamic",
    noise=NoiseModel(p1=5e-5, p2=5e-4, eps01=0.005, eps10=0.005),
    seed=9,
)
t0 = time.perf_counter()
run = protocol.run_protocol(config, rng=np.random.default_rng(9))
run.reduced_pair()
print(time.perf_counter() - t0)
"""


def random_state(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return (v / np.linalg.norm(v)).astype(np.complex128)


def time_kernel(fn, v, repeats: int) -> float:
    """Median seconds per call; the state is copied out of the timing."""
    times = []
    for _ in range(repeats):
        work = v.copy()
        t0 = time.perf_counter()
        fn(work)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def kernel_cases(n: int):
    q = n // 2
    half = 0.5
    return [
        ("apply_h", lambda mod: lambda v: mod.apply_h(v, n, q)),
        ("apply_x", lambda mod: lambda v: mod.apply_x(v, n, q)),
        ("apply_z", lambda mod: lambda v: mod.apply_z(v, n, q)),
        ("apply_s", lambda mod: lambda v: mod.apply_s(v, n, q)),
        ("apply_cz", lambda mod: lambda v: mod.apply_cz(v, n, 0, q)),
        ("prob_one", lambda mod: lambda v: mod.prob_one(v, n, q)),
        ("collapse_z", lambda mod: lambda v: mod.collapse_z(v, n, q, 0, half)),
    ]


def bench_kernels(n: int, repeats: int) -> None:
    v = random_state(n)
    print(f"per-kernel timings at n={n} (median of {repeats}, ms/call)")
    header = f"{'kernel':<12} {'python':>10} {'compiled':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, make in kernel_cases(n):
        py = time_kernel(make(_kernels_py), v, repeats) * 1e3
        if _kernels is None:
            print(f"{name:<12} {py:>10.3f} {'n/a':>10} {'n/a':>9}")
            continue
        cy = time_kernel(make(_kernels), v, repeats) * 1e3
        print(f"{name:<12} {py:>10.3f} {cy:>10.3f} {py / cy:>8.1f}x")


def bench_trajectory(qubits: int, hops: int, repeats: int) -> None:
    print(f"\nfull {hops}-hop noisy trajectory at n={qubits} "
          f"(median of {repeats}, seconds)")
    snippet = TRAJECTORY_SNIPPET.format(qubits=qubits, hops=hops)
    results = {}
    for backend in ("python", "compiled"):
        if backend == "compiled" and _kernels is None:
            print(f"  {backend:<9} n/a (extension not built)")
            continue
        env = dict(os.environ, HAMSTERWHEEL_KERNELS=backend)
        times = []
        for _ in range(repeats):
            proc = subprocess.run(
                [sys.executable, "-c", snippet],
                capture_output=True,
                text=True,
                env=env,
            )
            if proc.returncode != 0:
                print(f"  {backend:<9} failed:\n{proc.stderr}")
                break
            times.append(float(proc.stdout.strip()))
        else:
            results[backend] = statistics.median(times)
            print(f"  {backend:<9} {results[backend]:.3f}")
    if len(results) == 2:
        print(f"  speedup   {results['python'] / results['compiled']:.1f}x")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, default=20)
    parser.add_argument("--hops", type=int, default=56)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument(
        "--skip-trajectory",
        action="store_true",
        help="only time the raw kernels",
    )
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; timing the fallback only")
    bench_kernels(args.qubits, args.repeats)
    if not args.skip_trajectory:
        bench_trajectory(args.qubits, args.hops, max(3, args.repeats // 2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
