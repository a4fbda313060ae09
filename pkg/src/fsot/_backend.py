"""Kernel backend selection.

The compiled extension is preferred; the pure-NumPy module is the fallback
when the extension was not built. Setting ``FSOT_PURE_PYTHON=1`` in the
environment forces the fallback (used by the backend benchmark).
"""

from __future__ import annotations

import os


def _load():
    if not os.environ.get("FSOT_PURE_PYTHON"):
        try:
            from . import _kernels
            return _kernels, "compiled"
        except ImportError:
            pass
    from . import kernels_py
    return kernels_py, "python"


kernels, BACKEND = _load()
