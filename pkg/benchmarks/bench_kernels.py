"""Time the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is made at
import time from ``KRONGAP_NO_NUMBA``.

    python3 benchmarks/bench_kernels.py --nmax 2000 --repeat 3
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from krongap import _accel
from krongap.cf import complement, parse_stream
from krongap.nn import OffsetTable, brute_g_sweep, generate, realize
from krongap.torus import L2

nmax, repeat = int(sys.argv[1]), int(sys.argv[2])
a1 = parse_stream("0;1,(2)")
alpha = realize([a1, complement(a1)], nmax).alpha
ps = generate(alpha, nmax)

def best(fn):
    fn()  # warm-up (jit compile, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

def offset():
    t = OffsetTable(alpha, nmax - 1, L2)
    t.sweep(nmax)
    for n in range(2, nmax + 1, max(1, nmax // 50)):
        t.neighbours(n)

print(json.dumps({
    "backend": _accel.BACKEND,
    "brute_sweep": best(lambda: brute_g_sweep(ps, L2)),
    "offset_route": best(offset),
}))
"""


def run(flag, nmax, repeat):
    env = dict(os.environ, KRONGAP_NO_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(nmax), str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nmax", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    rows = [run(flag, args.nmax, args.repeat) for flag in ("0", "1")]
    print(f"N_max = {args.nmax}, best of {args.repeat}")
    print(f"{'backend':<8} {'brute sweep (s)':>16} {'offset route (s)':>17}")
    for r in rows:
        print(f"{r['backend']:<8} {r['brute_sweep']:>16.4f} {r['offset_route']:>17.4f}")
    nb, np_ = rows
    print(f"speed-up  {np_['brute_sweep'] / nb['brute_sweep']:>16.1f}x {np_['offset_route'] / nb['offset_route']:>16.1f}x")


if __name__ == "__main__":
    main()
