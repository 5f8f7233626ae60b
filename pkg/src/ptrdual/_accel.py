"""Optional numba acceleration.

Hot loops in :mod:`ptrdual._kernels` are plain Python/numpy functions.  When
numba is importable and ``PTRDUAL_DISABLE_NUMBA`` is unset (or ``0``), they are
compiled with ``numba.njit``; otherwise the same source runs as ordinary Python and
the vectorised numpy variants are used where one exists.
"""

from __future__ import annotations

import os

_FLAG = "PTRDUAL_DISABLE_NUMBA"


def _disabled_by_env() -> bool:
    return os.environ.get(_FLAG, "0").strip().lower() not in ("", "0", "false", "no")


try:  # pragma: no cover - exercised implicitly
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

USE_NUMBA: bool = _numba is not None and not _disabled_by_env()


def njit(fn):
    """Compile ``fn`` with numba when enabled, else return it untouched."""
    if not USE_NUMBA:
        return fn
    return _numba.njit(cache=True, nogil=True)(fn)


def python_impl(fn):
    """The uncompiled function behind a possibly-jitted kernel."""
    return getattr(fn, "py_func", fn)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
