"""Kernel backend selection.

The compiled extension is optional; when it is missing (or when the
NOISEBEAM_PURE_PY environment variable is set to a non-empty value) the
numpy implementation is used. Both expose the same ``posterior_mean``
contract; see benchmarks/bench_kernels.py for a speed comparison.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("NOISEBEAM_PURE_PY"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

posterior_mean = _impl.posterior_mean


def backend_name() -> str:
    return _impl.BACKEND
