"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``ROADLOC_NUMBA`` is not set to ``0``/``false``/``off``. Both
backends expose the same functions; ``backend(name)`` returns either module
explicitly, which the tests and the kernel benchmark use to compare them.
"""

import os
from types import ModuleType

from . import _numpy

_DISABLED = os.environ.get("ROADLOC_NUMBA", "1").strip().lower() in {"0", "false", "off", "no"}

try:
    if _DISABLED:
        raise ImportError("disabled by ROADLOC_NUMBA")
    from . import _numba
except ImportError:  # pragma: no cover - depends on environment
    _numba = None

USE_NUMBA = _numba is not None
_active: ModuleType = _numba if USE_NUMBA else _numpy

__all__ = [
    "USE_NUMBA",
    "backend",
    "bottom_up_merge",
    "poly_residuals",
    "scan_residuals",
    "shadow_field",
    "sliding_features",
    "subset_gains",
]


def backend(name: str | None = None) -> ModuleType:
    if name is None:
        return _active
    if name == "numpy":
        return _numpy
    if name == "numba":
        if _numba is None:
            raise RuntimeError("numba backend unavailable")
        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")


bottom_up_merge = _active.bottom_up_merge
subset_gains = _active.subset_gains
sliding_features = _active.sliding_features
shadow_field = _active.shadow_field
poly_residuals = _active.poly_residuals
scan_residuals = _active.scan_residuals
