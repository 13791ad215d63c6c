"""Kernel dispatch: the compiled extension when it is importable, else numpy.

Set ``QDIV_PURE_PYTHON=1`` before import to force the numpy fallback.
"""

import os

from . import _pykernels

if os.environ.get("QDIV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

transition_matrix = _impl.transition_matrix
spectral_overlap_trace = _impl.spectral_overlap_trace
pinched_trace = _impl.pinched_trace
concavity_bound = _impl.concavity_bound

__all__ = [
    "BACKEND",
    "transition_matrix",
    "spectral_overlap_trace",
    "pinched_trace",
    "concavity_bound",
]
