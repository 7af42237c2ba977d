"""Selects the stepping kernels at import time.

The compiled ``_kernels`` extension is used when it was built; setting
``ERKNWAVE_PURE_PYTHON=1`` forces the numpy implementation.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

if os.environ.get("ERKNWAVE_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
    DEFAULT = "python"
else:
    DEFAULT = "cython"

kernels = BACKENDS[DEFAULT]


def get_kernels(name=None):
    if name is None:
        return kernels
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
