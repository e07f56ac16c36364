"""Kernel backend selection.

The compiled Cython extension (_ckern, GMP-backed) is preferred; the pure
Python/numpy implementation (_purekern) is the fallback and the reference.
Set WILTONLAB_FORCE_PURE=1 to skip the compiled module, e.g. for the
backend benchmark or to debug a kernel discrepancy.
"""

import os

from ._purekern import (
    FLAG_NONFINITE,
    FLAG_OK,
    FLAG_SINGULAR,
    KIND_G,
    KIND_LOG,
    KIND_TRUNC,
    KIND_WILTON,
    MEASURE_GAUSS,
    MEASURE_LEBESGUE,
)

if os.environ.get("WILTONLAB_FORCE_PURE"):
    from . import _purekern as _impl
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _purekern as _impl

BACKEND = _impl.BACKEND

moment_block = _impl.moment_block
transfer_block = _impl.transfer_block
g_partial_pair = _impl.g_partial_pair
c0_block = _impl.c0_block

__all__ = [
    "BACKEND",
    "moment_block",
    "transfer_block",
    "g_partial_pair",
    "c0_block",
    "KIND_LOG",
    "KIND_TRUNC",
    "KIND_G",
    "KIND_WILTON",
    "MEASURE_LEBESGUE",
    "MEASURE_GAUSS",
    "FLAG_OK",
    "FLAG_SINGULAR",
    "FLAG_NONFINITE",
]
