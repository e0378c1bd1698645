"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy / pure
Python versions are.  Setting ``DOSTBC_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

from . import _fallback

_NAMES = ("single_symbol_argmin", "joint_argmin", "search_dfs")


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()


def available_backends() -> dict:
    """Name -> namespace of kernel functions, for every backend that loads."""
    out = {"python": SimpleNamespace(**{n: getattr(_fallback, n) for n in _NAMES})}
    if _compiled is not None:
        out["cython"] = SimpleNamespace(**{n: getattr(_compiled, n) for n in _NAMES})
    return out


if _compiled is not None and not os.environ.get("DOSTBC_PURE_PYTHON"):
    BACKEND = "cython"
    _impl = _compiled
else:
    BACKEND = "python"
    _impl = _fallback

single_symbol_argmin = _impl.single_symbol_argmin
joint_argmin = _impl.joint_argmin
search_dfs = _impl.search_dfs
