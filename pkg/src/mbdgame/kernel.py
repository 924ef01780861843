"""Search-kernel backend selection.

The compiled Cython kernel is preferred when built and the board fits in a
machine word; the pure-Python kernel covers everything else (including the
128-vertex product builds). Set ``MBD_PURE_PYTHON=1`` to force the fallback,
e.g. for the backend benchmark.
"""

from __future__ import annotations

import os

from . import _pycore
from ._pycore import INF, DOMINATOR, STALLER, NodeLimitExceeded, apply_perm, make_ball2

_CY_KERNEL = None
if not os.environ.get("MBD_PURE_PYTHON"):
    try:
        from . import _core as _cy  # type: ignore[attr-defined]

        _CY_KERNEL = _cy.Kernel
    except ImportError:
        _CY_KERNEL = None

BACKEND = "cython" if _CY_KERNEL is not None else "python"

#: The compiled kernel packs masks into one unsigned 64-bit word.
_CY_MAX_VERTICES = 63


def kernel_class_for(n: int, force_python: bool = False):
    if force_python or _CY_KERNEL is None or n > _CY_MAX_VERTICES:
        return _pycore.Kernel
    return _CY_KERNEL


__all__ = [
    "INF",
    "DOMINATOR",
    "STALLER",
    "NodeLimitExceeded",
    "apply_perm",
    "make_ball2",
    "BACKEND",
    "kernel_class_for",
]
