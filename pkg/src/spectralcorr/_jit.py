"""Optional numba acceleration.

Set ``SPECTRALCORR_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
The decorated functions keep their pure-Python body reachable through
``.py_func`` in either mode, which the tests use to cross-check both paths.
"""

import logging
import os

logger = logging.getLogger(__name__)

_DISABLED = os.environ.get("SPECTRALCORR_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:
    if _DISABLED:
        raise ImportError("disabled by SPECTRALCORR_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError as exc:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False
    logger.debug("numba unavailable, using pure-Python kernels: %s", exc)


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator.

    The fallback attaches ``py_func`` so callers can rely on it in both modes.
    """
    kwargs.setdefault("cache", True)

    def wrap(func):
        if HAVE_NUMBA:
            return numba.njit(**kwargs)(func)
        func.py_func = func
        return func

    if len(args) == 1 and callable(args[0]):
        return wrap(args[0])
    return wrap
