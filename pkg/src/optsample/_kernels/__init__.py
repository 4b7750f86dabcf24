"""Hot numerical kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is used. Setting ``OPTSAMPLE_PURE_PYTHON=1`` forces the fallback.
``BACKEND`` names the implementation actually in use.
"""

import os

from . import _fallback

if os.environ.get("OPTSAMPLE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

trig_poly_eval = _impl.trig_poly_eval
circle_envelope = _impl.circle_envelope
min_distance = _impl.min_distance
cells_occupied = _impl.cells_occupied

__all__ = [
    "BACKEND",
    "trig_poly_eval",
    "circle_envelope",
    "min_distance",
    "cells_occupied",
]
