import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stringnet_afdlu import _kernels_py, kernels
from stringnet_afdlu.fusion import builtin

try:
    from stringnet_afdlu import _kernels as ext
except ImportError:  # extension not built
    ext = None

needs_ext = pytest.mark.skipif(ext is None, reason="compiled kernels not built")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    if ext is not None:
        assert kernels.BACKEND == "cython"


@needs_ext
@given(st.lists(st.integers(0, 30), min_size=1, max_size=60), st.integers(0, 2 ** 31))
def test_merge_sorted_backends_agree(keys, seed):
    rng = np.random.default_rng(seed)
    k = np.array(keys, dtype=np.int64)
    a = rng.normal(size=len(k)) + 1j * rng.normal(size=len(k))
    if len(k) > 2:
        a[1] = -a[0] if k[1] == k[0] else a[1]   # exercise cancellation
    k1, a1 = _kernels_py.merge_sorted(k, a, 1e-14)
    k2, a2 = ext.merge_sorted(k, a, 1e-14)
    assert np.array_equal(k1, k2) and np.allclose(a1, a2, atol=1e-13)


@needs_ext
@settings(deadline=None, max_examples=60)
@given(st.sampled_from(["ising", "ty_z3", "vec_z3"]), st.integers(0, 2 ** 31), st.integers(3, 8))
def test_ring_fuse_backends_agree(name, seed, n):
    C = builtin(name)
    rng = np.random.default_rng(seed)
    x = [int(v) for v in rng.integers(0, C.rank, size=n)]
    j = [int(v) for v in rng.integers(0, C.rank, size=n)]
    s = int(rng.integers(0, C.rank))
    fs = [tuple(C.fusion_out[a][s]) for a in range(C.rank)]
    y1, c1 = _kernels_py.ring_fuse(C.Farray, fs, x, j, s, 1e-14)
    y2, c2 = ext.ring_fuse(C.Farray, fs, x, j, s, 1e-14)
    d1 = {tuple(y): c for y, c in zip(y1, c1)}
    d2 = {tuple(y): c for y, c in zip(y2, c2)}
    assert d1.keys() == d2.keys()
    assert all(abs(d1[k] - d2[k]) < 1e-12 for k in d1)


def test_pure_fallback_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, STRINGNET_AFDLU_PURE="1")
    code = ("from stringnet_afdlu import BACKEND, HoneycombTorus, builtin\n"
            "from stringnet_afdlu.afdlu import prepare\n"
            "prepare(builtin('ising'), HoneycombTorus(2, 2), seed=0)\n"
            "print(BACKEND)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
