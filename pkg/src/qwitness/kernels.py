"""Kernel backend selection.

The compiled Cython module is used when it was built; otherwise (or when
``QWITNESS_PURE_PYTHON`` is set to a non-empty value) the numpy fallback
is imported instead. ``BACKEND`` names the active choice.
"""

import os

from . import _pykernels

if os.environ.get("QWITNESS_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"

scan_reduced = _impl.scan_reduced
scan_full = _impl.scan_full
batch_moments = _impl.batch_moments


def backends():
    """All importable kernel modules by name; used by tests and the benchmark."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
