"""Pick the per-block kernel implementation at import time.

The compiled extension is preferred; set ``STEMNOISE_PURE_PYTHON=1`` to
force the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("STEMNOISE_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py


def available_backends():
    """Map backend name to kernel module for every importable implementation."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
