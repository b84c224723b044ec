"""Hot integration kernels: compiled extension when available, NumPy otherwise.

Set ATTSAFE_PURE_PYTHON=1 to force the NumPy fallback (used by the parity
tests and the kernel benchmark).
"""

import os

from . import _numpy

if os.environ.get("ATTSAFE_PURE_PYTHON"):
    _impl = _numpy
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy

BACKEND = _impl.BACKEND
step_zoh = _impl.step_zoh
shoot_nodes = _impl.shoot_nodes
shoot_vjp = _impl.shoot_vjp

numpy_backend = _numpy
