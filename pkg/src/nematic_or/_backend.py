"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; setting
``NEMATIC_OR_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _pykernels

if os.environ.get("NEMATIC_OR_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels

        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
