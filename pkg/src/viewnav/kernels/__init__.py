"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The compiled extension (``_impl_c``, built from Cython) is preferred; if it
is missing or ``VIEWNAV_PURE_PYTHON=1`` is set, the numpy/heapq fallback in
``_impl_py`` is used. Both backends implement the same contracts and are
cross-checked in the test suite. ``BACKEND`` names the active one.
"""

import os

from . import _impl_py

if os.environ.get("VIEWNAV_PURE_PYTHON") == "1":
    _impl = _impl_py
    BACKEND = "python"
else:
    try:
        from . import _impl_c as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _impl_py
        BACKEND = "python"

distance_field = _impl.distance_field
ray_wall_distance = _impl.ray_wall_distance
pitch_resolve = _impl.pitch_resolve
dtw_cost = _impl.dtw_cost
nms_select = _impl.nms_select

__all__ = [
    "BACKEND",
    "distance_field",
    "ray_wall_distance",
    "pitch_resolve",
    "dtw_cost",
    "nms_select",
]
