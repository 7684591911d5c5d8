"""Compare the numba-compiled kernels with their numpy fallbacks.

Run from the repository root::

    python3 benchmarks/bench_kernels.py            # per-kernel timings
    python3 benchmarks/bench_kernels.py --train    # also a short training run per backend

Kernel timings call both variants in-process (``t2p.kernels.NUMBA_KERNELS``
and ``NUMPY_KERNELS``). The training comparison starts one subprocess per
backend, toggled by ``T2P_DISABLE_NUMBA``, since the backend is bound at
import time.
"""

import argparse
import csv
import os
import subprocess
import sys
import timeit

import numpy as np

from t2p import kernels
from t2p._accel import HAVE_NUMBA

TRAIN_SNIPPET = """
import time
from t2p.data import gen_sy4
from t2p.model import preset, train
series = gen_sy4(0.0, 10, 0)
train(series, preset("sy4", epochs=1))          # warm-up (compilation)
t0 = time.perf_counter()
train(series, preset("sy4", epochs={epochs}))
print(time.perf_counter() - t0)
"""


def cases(rng):
    """``name -> args`` with shapes met during SY4 training (batch 8, m = 100)."""
    x = rng.normal(size=(8, 12, 98))
    w = rng.normal(size=(24, 12, 3))
    y = kernels.NUMPY_KERNELS["conv1d_forward"](x, w, 1)
    pooled, idx = kernels.NUMPY_KERNELS["maxpool1d_forward"](y, 2, 2)
    windows = rng.normal(size=(40, 100))
    return {
        "conv1d_forward": (x, w, 1),
        "conv1d_backward_input": (y, w, 1, x.shape[2]),
        "conv1d_backward_weight": (y, x, 1, 3),
        "maxpool1d_forward": (y, 2, 2),
        "maxpool1d_backward": (pooled, idx, y.shape[2]),
        "dtw_cost": (windows[0], windows[1], -1),
        "dtw_matrix": (windows[:12], 10),
        "pairwise_euclidean": (windows,),
    }


def time_call(fn, args, repeat):
    fn(*args)  # warm-up / compile
    number = 20
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def train_seconds(disable, epochs):
    env = dict(os.environ, T2P_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", TRAIN_SNIPPET.format(epochs=epochs)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--train", action="store_true", help="also time a short training run per backend")
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--csv", help="write results to this CSV")
    args = parser.parse_args()

    if not HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    results = []
    for name, call_args in cases(np.random.default_rng(0)).items():
        t_nb = time_call(kernels.NUMBA_KERNELS[name], call_args, args.repeat)
        t_np = time_call(kernels.NUMPY_KERNELS[name], call_args, args.repeat)
        results.append((name, t_nb, t_np))
    if args.train:
        results.append((f"train_{args.epochs}_epochs", train_seconds(False, args.epochs),
                        train_seconds(True, args.epochs)))

    print(f"{'kernel':<26}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, t_nb, t_np in results:
        print(f"{name:<26}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>10.2f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kernel", "numba_seconds", "numpy_seconds"])
            w.writerows(results)


if __name__ == "__main__":
    main()
