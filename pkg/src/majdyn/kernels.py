"""Kernel selection: the compiled extension when importable, else the
pure-Python fallback.  Set ``MAJDYN_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"

if os.environ.get("MAJDYN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

neighbor_sums = _impl.neighbor_sums
sync_step = _impl.sync_step
sync_run = _impl.sync_run
async_run = _impl.async_run
cone_backward = _impl.cone_backward

__all__ = ["BACKEND", "neighbor_sums", "sync_step", "sync_run", "async_run", "cone_backward"]
