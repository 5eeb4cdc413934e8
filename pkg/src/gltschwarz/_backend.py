"""Backend selection for the compiled kernels.

Set ``GLTSCHWARZ_BACKEND=numpy`` to force the pure-numpy kernels.  The
default is ``numba`` when it can be imported.
"""
import os

BACKEND_ENV = "GLTSCHWARZ_BACKEND"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def requested_backend():
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    if value == "numba" and not HAVE_NUMBA:
        return "numpy"
    return value


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged without numba."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
