"""Optional numba acceleration.

Hot kernels are written once and decorated with :func:`maybe_njit`.  When
numba is importable (and not disabled) they are compiled; otherwise the
plain Python/numpy definitions run as-is.  Select the backend with the
environment variable ``GRAVSHEETS_NUMBA``:

    unset / "1"  use numba when available ("1" makes it mandatory)
    "0"          force the pure Python/numpy fallback

The active backend is recorded in run manifests so outputs can be traced.
Both backends are numerically equivalent but not guaranteed bit-identical
to each other (libm vs. vectorized transcendentals may differ in the last
ulp); reruns on a fixed backend are deterministic.
"""

import os

_flag = os.environ.get("GRAVSHEETS_NUMBA", "").strip().lower()

try:
    from numba import njit as _numba_njit
    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

if _flag in ("0", "off", "false", "no"):
    USING_NUMBA = False
elif _flag in ("1", "on", "true", "yes"):
    if not _HAVE_NUMBA:
        raise ImportError("GRAVSHEETS_NUMBA=1 but numba is not installed")
    USING_NUMBA = True
else:
    USING_NUMBA = _HAVE_NUMBA

BACKEND = "numba" if USING_NUMBA else "python"


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when the numba backend is active, identity otherwise."""
    if USING_NUMBA:
        return _numba_njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def identity(func):
        return func

    return identity
