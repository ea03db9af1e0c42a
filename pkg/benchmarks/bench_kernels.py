"""Compare the numba and numpy flavours of every hot kernel.

    python benchmarks/bench_kernels.py [--digits 10000000] [--repeat 3]

Also times a full single-threaded analysis pass under each flavour by
re-running this script with DIGITLAW_NO_NUMBA set.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from digitlaw import kernels
from digitlaw._accel import HAVE_NUMBA


def best_of(fn, repeat):
    fn()  # warm-up (numba compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(n):
    rng = np.random.default_rng(0)
    digits = rng.integers(0, 10, n, dtype=np.uint8)
    _, d = kernels.KERNELS["scan_prefix"][1](digits, 0, 0, 9, np.sqrt(8.25))
    edges = (-3.0 * 60 + np.arange(61) * 6.0) / 60
    delta = d / np.sqrt(2 * np.log(np.log(np.arange(1, n + 1) + 16.0)))
    return {
        "scan_prefix": (digits, 0, 0, 9, np.sqrt(8.25)),
        "hist_counts": (d, edges),
        "envelope": (delta, 0, 10 ** 8, 1000),
        "pattern_counts": (digits, 10, 2),
        "bbp_series": (10 ** 6, 1),
        "pi_spigot": (1000,),
    }


def end_to_end(n):
    code = ("import time; from digitlaw.harness import RunConfig, run_analysis;"
            "import tempfile; t=time.perf_counter();"
            f"run_analysis(RunConfig(source='gen:baseline', max_digits={n},"
            " out_dir=tempfile.mkdtemp()));print(time.perf_counter()-t)")
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, DIGITLAW_NO_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True)
        out[label] = float(res.stdout.strip().splitlines()[-1])
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=10 ** 7)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    print(f"{'kernel':<16}{'numba s':>10}{'numpy s':>10}{'ratio':>8}")
    for name, case in kernel_cases(args.digits).items():
        nb, np_ = kernels.KERNELS[name]
        t_nb = best_of(lambda: nb(*case), args.repeat)
        t_np = best_of(lambda: np_(*case), 1 if name == "pi_spigot" else args.repeat)
        print(f"{name:<16}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>8.1f}")

    e2e = end_to_end(args.digits)
    print(f"\nanalysis of {args.digits} baseline digits (first-call JIT load included):")
    for label, t in e2e.items():
        print(f"  {label:<6} {t:8.2f} s  {args.digits / t / 1e6:6.1f} M digits/s")


if __name__ == "__main__":
    main()
