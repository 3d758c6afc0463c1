"""Compare the compiled and pure-Python kernels.

Times each kernel on synthetic inputs and a full preparation run with the
backend switched, and checks the outputs agree.

    python3 bench/benchmark.py [--repeat N]
"""
import argparse
import time
from contextlib import contextmanager

import numpy as np

from stringnet_afdlu import HoneycombTorus, StringNet, _kernels_py, builtin, kernels
from stringnet_afdlu.afdlu import prepare
from stringnet_afdlu.oracle import fidelity

try:
    from stringnet_afdlu import _kernels as ext
except ImportError:
    ext = None


@contextmanager
def backend(mod):
    saved = kernels.merge_sorted, kernels.ring_fuse
    kernels.merge_sorted, kernels.ring_fuse = mod.merge_sorted, mod.ring_fuse
    try:
        yield
    finally:
        kernels.merge_sorted, kernels.ring_fuse = saved


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_merge(mod, repeat):
    rng = np.random.default_rng(0)
    keys = rng.integers(0, 200_000, size=1_000_000).astype(np.int64)
    amps = rng.normal(size=keys.size) + 1j * rng.normal(size=keys.size)
    return best(lambda: mod.merge_sorted(keys, amps, 1e-14), repeat)


def bench_ring(mod, repeat):
    C = builtin("ty_z3")
    rng = np.random.default_rng(1)
    s = C.index("sigma")
    fs = [tuple(C.fusion_out[a][s]) for a in range(C.rank)]
    rings = [([int(v) for v in rng.integers(0, C.rank, 6)], [int(v) for v in rng.integers(0, C.rank, 6)])
             for _ in range(400)]
    return best(lambda: [mod.ring_fuse(C.Farray, fs, x, j, s, 1e-14) for x, j in rings], repeat)


def bench_prepare(mod, repeat, name, lx, ly):
    C, L = builtin(name), HoneycombTorus(lx, ly)
    with backend(mod):
        return best(lambda: prepare(C, L, seed=0)[0], repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if ext is None:
        print("compiled kernels not built; only the pure-Python backend is available")
    mods = [("python", _kernels_py)] + ([("cython", ext)] if ext is not None else [])
    cases = [("merge_sorted 1e6 keys", lambda m: bench_merge(m, args.repeat)),
             ("ring_fuse 400 sigma rings", lambda m: bench_ring(m, args.repeat)),
             ("prepare ising 3x3", lambda m: bench_prepare(m, args.repeat, "ising", 3, 3)),
             ("prepare ty_z3 2x2", lambda m: bench_prepare(m, args.repeat, "ty_z3", 2, 2))]
    print(f"{'case':28s} " + " ".join(f"{n:>10s}" for n, _ in mods) + "   speedup  agree")
    for label, fn in cases:
        res = [fn(m) for _, m in mods]
        row = f"{label:28s} " + " ".join(f"{t:9.4f}s" for t, _ in res)
        if len(res) == 2:
            a, b = res[0][1], res[1][1]
            if label.startswith("merge"):
                agree = np.array_equal(a[0], b[0]) and np.allclose(a[1], b[1])
            elif label.startswith("ring"):
                agree = all(dict(zip(map(tuple, ya), ca)).keys() == dict(zip(map(tuple, yb), cb)).keys()
                            for (ya, ca), (yb, cb) in zip(a, b))
            else:
                agree = abs(fidelity(a, b) - 1) < 1e-10
            row += f"   {res[0][0] / res[1][0]:6.1f}x  {agree}"
        print(row, flush=True)
    print(f"default backend: {kernels.BACKEND}")


if __name__ == "__main__":
    main()
