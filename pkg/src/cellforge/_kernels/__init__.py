"""Kernel backend selection.

The compiled Cython core is preferred; the numpy implementation in ``pure``
is a drop-in fallback with bit-identical results.  Set CELLFORGE_PURE_PYTHON
to any non-empty value to force the fallback (used by the benchmark and the
backend-agreement tests).
"""

import os

from . import pure as _pure

if os.environ.get("CELLFORGE_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND_NAME

min_margins = _impl.min_margins
count_hits_two = _impl.count_hits_two
any_hit_two = _impl.any_hit_two
csg_member = _impl.csg_member
cells_member = _impl.cells_member
near_any_surface = _impl.near_any_surface
agreement_count = _impl.agreement_count
march = _impl.march


def active_backend() -> str:
    return BACKEND
