"""Benchmark: compiled kernels vs the pure-NumPy fallback.

Times the two hot kernels at episode scale and the full per-episode
pipeline under each backend. Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from fsot import _kernels, kernels_py


def best_of(fn, repeats=7):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels():
    rng = np.random.default_rng(0)
    x80 = rng.normal(size=(75, 80))
    c80 = rng.normal(size=(5, 80))
    x640 = rng.normal(size=(75, 640))
    c640 = rng.normal(size=(5, 640))
    l = rng.uniform(0.0, 2.0, (75, 5))
    K = np.exp(-10.0 * l)
    logK = -10.0 * l
    a = np.ones(75)
    b = np.full(5, 15.0)

    cases = [
        ("sqdist 75x5 r=80", lambda k: k.pairwise_sqdist(x80, c80)),
        ("sqdist 75x5 r=640", lambda k: k.pairwise_sqdist(x640, c640)),
        ("sinkhorn plain 75x5", lambda k: k.sinkhorn_plain(K, a, b, 1e-6, 1000)),
        ("sinkhorn log 75x5", lambda k: k.sinkhorn_log(logK, np.log(a), np.log(b), 1e-6, 1000)),
    ]
    print(f"{'kernel':24s} {'compiled':>12s} {'pure numpy':>12s} {'speedup':>9s}")
    for name, call in cases:
        loops = 200
        tc = best_of(lambda: [call(_kernels) for _ in range(loops)]) / loops
        tp = best_of(lambda: [call(kernels_py) for _ in range(loops)]) / loops
        print(f"{name:24s} {tc * 1e6:10.1f}us {tp * 1e6:10.1f}us {tp / tc:8.1f}x")

    # agreement spot check
    uc, vc, *_ = _kernels.sinkhorn_plain(K, a, b, 1e-9, 1000)
    up, vp, *_ = kernels_py.sinkhorn_plain(K, a, b, 1e-9, 1000)
    dev = max(np.max(np.abs(uc - up) / up), np.max(np.abs(vc - vp) / vp))
    print(f"\nbackend relative deviation on scaling vectors: {dev:.2e}")


EPISODE_SNIPPET = """
import time
import fsot
from fsot import EpisodeSpec, LstParams, MapParams, lst_transform, map_classify, synth_episode
ep = synth_episode(EpisodeSpec(5, 1, 15, seed=0), 640, 100.0, 1.0, seed=1)
lst, mp = LstParams(0.5, 0.3, 0.98), MapParams(10.0, 0.3, 20)
for _ in range(3):
    map_classify(lst_transform(ep, lst), mp)
times = []
for _ in range(15):
    t0 = time.perf_counter()
    map_classify(lst_transform(ep, lst), mp)
    times.append(time.perf_counter() - t0)
print(f"{fsot.BACKEND}: {1000 * min(times):.2f} ms/episode")
"""


def bench_episode():
    print("\nfull episode (transform + 20 outer steps, d=640, 5-way 1-shot):")
    sys.stdout.flush()
    for env_val in ("", "1"):
        env = dict(os.environ)
        if env_val:
            env["FSOT_PURE_PYTHON"] = env_val
        else:
            env.pop("FSOT_PURE_PYTHON", None)
        subprocess.run([sys.executable, "-c", EPISODE_SNIPPET], env=env, check=True)


if __name__ == "__main__":
    bench_kernels()
    bench_episode()
