"""Backend selection for the hot loops.

The compiled extension ``polylab._accel`` is used when it was built and
imports cleanly; otherwise the numpy implementations in
``polylab._fallback`` are used.  Setting ``POLYLAB_NO_EXT=1`` forces the
fallback.
"""
from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if not os.environ.get("POLYLAB_NO_EXT"):
    try:
        from . import _accel as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback

aberth = _impl.aberth
riesz_energy_grad = _impl.riesz_energy_grad
coulomb_grad_hess = _impl.coulomb_grad_hess

__all__ = ["BACKEND", "aberth", "riesz_energy_grad", "coulomb_grad_hess"]
