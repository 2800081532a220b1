"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy/scipy
fallback is used. Set ``SKINPULSE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import logging
import os

from . import _kernels_py

logger = logging.getLogger(__name__)


def _select():
    if os.environ.get("SKINPULSE_PURE_PYTHON", "").strip() not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _ckernels
    except ImportError as exc:
        logger.debug("compiled kernels unavailable (%s); using numpy fallback", exc)
        return _kernels_py, "python"
    return _ckernels, "cython"


_impl, BACKEND = _select()

ccnn_window_real_sums = _impl.ccnn_window_real_sums
ccnn_patch_real_sums = _impl.ccnn_patch_real_sums
sos_filter_rows = _impl.sos_filter_rows


def backends() -> dict:
    """All importable backends by name, for benchmarks and agreement tests."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
