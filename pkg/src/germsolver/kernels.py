"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
fallback.  Setting ``GERMSOLVER_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("GERMSOLVER_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
fv_step = _impl.fv_step
parabolic_step = _impl.parabolic_step
rk4_profile = _impl.rk4_profile
num_flux_array = _impl.num_flux_array

FLUX_KINDS = {"godunov": 0, "engquist_osher": 1, "lax_friedrichs": 2}

__all__ = ["BACKEND", "fv_step", "parabolic_step", "rk4_profile", "num_flux_array", "FLUX_KINDS"]
