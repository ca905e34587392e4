"""Select the kernel implementation at import time.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``PERMLAB_PURE_PYTHON`` is set to a non-empty value,
the numpy fallback is used.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def load_backend(name: str | None = None):
    """Return the kernel module called ``name`` (or the default one)."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


if os.environ.get("PERMLAB_PURE_PYTHON") or _compiled is None:
    kernels = _kernels_py
else:
    kernels = _compiled

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND", "available_backends", "load_backend"]
