"""Backend selection for the hot kernels.

Numba is used when it is importable and ``GDSIM_DISABLE_NUMBA`` is unset
(or set to ``0``). Every compiled kernel has a pure-numpy twin in
``gdsim._kernels``; both produce identical results on the same inputs.
"""

import os
import warnings

_FALSY = {"", "0", "false", "no", "off"}


def _env_disabled():
    return os.environ.get("GDSIM_DISABLE_NUMBA", "").strip().lower() not in _FALSY


try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _env_disabled()

if not HAVE_NUMBA and not _env_disabled():  # pragma: no cover
    warnings.warn("numba not found; falling back to numpy kernels", RuntimeWarning)


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator.

    Defaults to ``cache=True, nogil=True`` so compiled kernels release the
    GIL inside thread pools.
    """
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return _numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
