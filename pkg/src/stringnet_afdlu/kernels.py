"""Kernel dispatch: the compiled extension when importable, otherwise pure Python."""
import os

from . import _kernels_py

BACKEND = "python"
merge_sorted = _kernels_py.merge_sorted
ring_fuse = _kernels_py.ring_fuse

if os.environ.get("STRINGNET_AFDLU_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _ext
    except ImportError:
        pass
    else:
        merge_sorted = _ext.merge_sorted
        ring_fuse = _ext.ring_fuse
        BACKEND = "cython"
