"""Kernel backend selection: compiled Cython extension with pure-numpy fallback.

The compiled backend is preferred when it imports cleanly; set
``RISKGRID_PURE_PYTHON=1`` to force the fallback. Both backends produce
bit-identical trees, so the choice only affects speed.
"""

from __future__ import annotations

import os
from types import ModuleType

from riskgrid._kernels import pure

_FORCE_PURE = os.environ.get("RISKGRID_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_PURE:
    try:
        from riskgrid._kernels import _speedups as _compiled
    except ImportError:
        _compiled = None
    else:
        # A partially built extension is as good as no extension.
        if not hasattr(_compiled, "fit_tree_arrays"):
            _compiled = None
else:
    _compiled = None

_DEFAULT: ModuleType = _compiled if _compiled is not None else pure

#: Name of the backend picked at import time ("cython" or "python").
KERNEL_BACKEND: str = _DEFAULT.BACKEND_NAME


def get_backend(name: str | None = None) -> ModuleType:
    """Resolve a backend by name; None returns the import-time default."""
    if name is None:
        return _DEFAULT
    if name == "python":
        return pure
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available in this installation")
        return _compiled
    raise ValueError(f"unknown kernel backend: {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    if _compiled is not None:
        out.insert(0, "cython")
    return out
