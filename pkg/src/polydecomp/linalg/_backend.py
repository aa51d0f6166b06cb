"""Selects the GF(p) elimination kernel at import time.

The compiled extension is used when it was built; otherwise the numpy
fallback.  ``POLYDECOMP_KERNEL=python`` forces the fallback.
"""

from __future__ import annotations

import contextlib
import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_KERNELS = {"python": _fallback}
if _compiled is not None:
    _KERNELS["cython"] = _compiled

_active = "cython" if _compiled is not None else "python"
if os.environ.get("POLYDECOMP_KERNEL", "").lower() == "python":
    _active = "python"


def available() -> list[str]:
    return sorted(_KERNELS)


def get_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _KERNELS:
        raise ValueError(f"kernel {name!r} not available; have {available()}")
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def rref_modp(a, p):
    return _KERNELS[_active].rref_modp(a, p)


def matmul_modp(a, b, p):
    if _active == "cython":
        return _compiled.matmul_modp(a, b.T.copy(), p)
    return _fallback.matmul_modp(a, b, p)
