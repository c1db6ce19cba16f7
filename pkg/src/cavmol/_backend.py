"""Select the compiled master-equation loop, falling back to pure numpy.

``qcme_loop_separable`` is the hot inner loop of the whole package; the
Cython build is preferred, and the numpy implementation is a drop-in
replacement with identical semantics.
"""

from __future__ import annotations

from ._qcme_np import qcme_loop_history
from ._qcme_np import qcme_loop_separable as _qcme_loop_separable_np

try:
    from ._qcme_cy import qcme_loop_separable as _qcme_loop_separable_cy

    BACKEND = "cython"
    qcme_loop_separable = _qcme_loop_separable_cy
except ImportError:  # extension not built; numpy fallback
    BACKEND = "numpy"
    qcme_loop_separable = _qcme_loop_separable_np

__all__ = [
    "BACKEND",
    "qcme_loop_separable",
    "qcme_loop_history",
    "_qcme_loop_separable_np",
]
