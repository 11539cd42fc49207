"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``OPTRATCHET_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _purepy

if os.environ.get("OPTRATCHET_PURE_PYTHON"):
    _impl = _purepy
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _purepy

BACKEND = "cython" if _impl is not _purepy else "python"

bessel_table = _impl.bessel_table
rk4_evolve = _impl.rk4_evolve
miller_start = _impl.miller_start
