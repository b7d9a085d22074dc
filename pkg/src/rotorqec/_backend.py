"""Pick the compiled kernels when available; ``ROTORQEC_PURE=1`` forces numpy."""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("ROTORQEC_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"

apply_error_ket = kernels.apply_error_ket
modular_sector_weights = kernels.modular_sector_weights
phase_expectation_sum = kernels.phase_expectation_sum
