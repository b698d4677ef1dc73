"""Select the kernel implementation at import time.

The compiled extension is preferred; set ``HOLOMIMO_PURE_PYTHON=1`` to
force the numpy fallback.
"""
import os

if os.environ.get("HOLOMIMO_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
