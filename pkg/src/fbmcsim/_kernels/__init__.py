"""Hot-kernel backend selection.

The compiled Cython core is preferred when importable; the pure-NumPy
fallback has identical semantics.  Set ``FBMCSIM_KERNELS=python`` or
``FBMCSIM_KERNELS=compiled`` to force a backend (the latter raises if the
extension is missing).
"""

from __future__ import annotations

import os

from . import _numpy


def _load_compiled():
    try:
        from . import _core

        return _core
    except ImportError:
        return None


_choice = os.environ.get("FBMCSIM_KERNELS", "").lower()
if _choice in ("python", "numpy"):
    _impl = _numpy
elif _choice in ("compiled", "cython"):
    _impl = _load_compiled()
    if _impl is None:
        raise ImportError(
            "FBMCSIM_KERNELS requested the compiled backend but "
            "fbmcsim._kernels._core is not built"
        )
else:
    _impl = _load_compiled() or _numpy

BACKEND = _impl.BACKEND
synth_accumulate = _impl.synth_accumulate
fold_windows = _impl.fold_windows
lms_train = _impl.lms_train


def backend_name() -> str:
    return BACKEND
