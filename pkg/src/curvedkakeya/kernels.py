"""Backend selection for the column kernels.

The compiled extension is used when it imports; setting the environment
variable ``CURVEDKAKEYA_PURE=1`` forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("CURVEDKAKEYA_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

column_lengths = _impl.column_lengths
union_length = _impl.union_length

__all__ = ["BACKEND", "column_lengths", "union_length"]
