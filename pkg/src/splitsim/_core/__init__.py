"""Kernel backend selection.

The hot kernels exist twice: a compiled Cython extension and a pure
numpy/Python fallback with identical semantics.  The compiled backend is
preferred when importable; set SPLITSIM_BACKEND=py or =cy to force one.
"""

from __future__ import annotations

import os

from . import kernels_py

_choice = os.environ.get("SPLITSIM_BACKEND", "auto")

if _choice == "py":
    _impl = kernels_py
elif _choice == "cy":
    from . import _kernels_cy as _impl  # hard error if not built
else:
    try:
        from . import _kernels_cy as _impl
    except ImportError:
        _impl = kernels_py

BACKEND = _impl.BACKEND
part_counts = _impl.part_counts
max_bucket_count = _impl.max_bucket_count
bfs_dist = _impl.bfs_dist
cc_labels = _impl.cc_labels
vizing_color = _impl.vizing_color
