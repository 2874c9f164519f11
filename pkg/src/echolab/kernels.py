"""Selects the compiled integration kernels, falling back to pure Python.

Set ``ECHOLAB_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the kernel-equivalence tests).
"""

import os

from . import _kernels_py

try:
    if os.environ.get("ECHOLAB_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _kernels as _impl

    COMPILED = True
except ImportError:
    _impl = _kernels_py
    COMPILED = False

StepUnderflow = _kernels_py.StepUnderflow
NonFiniteState = _kernels_py.NonFiniteState

lindblad_integrate = _impl.lindblad_integrate
gaussian_integrate = _impl.gaussian_integrate

__all__ = [
    "COMPILED",
    "NonFiniteState",
    "StepUnderflow",
    "gaussian_integrate",
    "lindblad_integrate",
]
