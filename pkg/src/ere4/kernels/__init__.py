"""Hot loops with a compiled backend and a pure-numpy fallback.

The compiled extension is used when it imports; set ``ERE4_PURE_PYTHON=1``
to force the fallback.  ``BACKEND`` names the active choice and both modules
stay importable for cross-checking.
"""

from __future__ import annotations

import os

from . import _pure

pure = _pure

compiled = None
if not os.environ.get("ERE4_PURE_PYTHON"):
    try:
        from . import _compiled as compiled  # type: ignore[no-redef]
    except ImportError:
        compiled = None

_active = compiled if compiled is not None else _pure
BACKEND = "compiled" if compiled is not None else "pure"

gauss_propagate = _active.gauss_propagate
nbody_accel = _active.nbody_accel

__all__ = ["BACKEND", "gauss_propagate", "nbody_accel", "pure", "compiled"]
