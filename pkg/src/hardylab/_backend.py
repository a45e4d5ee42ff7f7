"""Kernel backend selection.

The compiled extension ``hardylab._kernels`` is used when it imports
cleanly; otherwise the pure-Python twin takes over.  Set the environment
variable ``HARDYLAB_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("HARDYLAB_BACKEND", "").strip().lower()

if _forced == "python":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        kernels = _compiled
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "HARDYLAB_BACKEND=compiled requested but the extension is not built"
            )
        kernels = _kernels_py


def get_backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return kernels.BACKEND_NAME
