"""Select the compiled Gram kernels when available, else the numpy ones.

Set ``KIVBAND_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("KIVBAND_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

kendall_counts = _impl.kendall_counts
kendall_gram = _impl.kendall_gram
sq_dists = _impl.sq_dists
