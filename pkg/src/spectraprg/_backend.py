"""Kernel selection.

The compiled extension is used when it imports; setting
``SPECTRAPRG_BACKEND=python`` forces the numpy fallback.
"""
import os

from . import _pykernels

_forced = os.environ.get("SPECTRAPRG_BACKEND", "").lower()

if _forced == "python":
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        if _forced == "cython":
            raise
        kernels = _pykernels

BACKEND = kernels.BACKEND
python_kernels = _pykernels


def compiled_kernels():
    """Return the compiled module, or None if it was not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
