"""Exact simulation of string-net ground states and adaptive gauging protocols."""
from .fusion import FusionCategory, builtin
from .kernels import BACKEND
from .lattice import HoneycombTorus
from .state import SparseState
from .stringnet import StringNet

__version__ = "0.1.0"
__all__ = ["FusionCategory", "builtin", "HoneycombTorus", "SparseState", "StringNet", "BACKEND", "__version__"]
