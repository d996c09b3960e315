"""Kernel backend selection: compiled extension if built, numpy fallback otherwise.

Set ``NLKACZMARZ_PURE_PYTHON=1`` to force the fallback (used by the kernel
benchmark and parity tests).
"""
import os

if os.environ.get("NLKACZMARZ_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

COMPILED = _impl.COMPILED
BACKEND = "compiled" if COMPILED else "python"

ngabk_select = _impl.ngabk_select
mrnabk_select = _impl.mrnabk_select

# The direction is a dense matrix-vector product; numpy's BLAS beats a
# hand-rolled C loop past a few hundred rows, so both backends share it.
from ._kernels_py import block_direction  # noqa: E402
