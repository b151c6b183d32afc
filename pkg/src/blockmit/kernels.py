"""Backend selection for the density-matrix kernels.

The compiled extension is used when it imports; otherwise the NumPy
implementation is used. Set ``BLOCKMIT_KERNEL=python`` to force the fallback.
"""

from __future__ import annotations

import os

from blockmit import _pykernels

if os.environ.get("BLOCKMIT_KERNEL", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from blockmit import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND
apply_unitary_1q = _impl.apply_unitary_1q
apply_unitary_2q = _impl.apply_unitary_2q
apply_diagonal = _impl.apply_diagonal
depolarize_1q = _impl.depolarize_1q
depolarize_2q = _impl.depolarize_2q

__all__ = [
    "BACKEND",
    "apply_unitary_1q",
    "apply_unitary_2q",
    "apply_diagonal",
    "depolarize_1q",
    "depolarize_2q",
]
