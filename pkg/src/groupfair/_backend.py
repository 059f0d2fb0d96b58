"""Kernel backend selection.

Set ``GROUPFAIR_BACKEND=numpy`` to force the pure-numpy kernels; the default
``auto`` uses numba when it imports cleanly.
"""
import os

ENV_VAR = "GROUPFAIR_BACKEND"


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def requested_backend():
    value = os.environ.get(ENV_VAR, "auto").strip().lower()
    if value not in ("auto", "numba", "numpy"):
        raise ValueError(f"{ENV_VAR} must be auto, numba or numpy, got {value!r}")
    return value


def use_numba():
    choice = requested_backend()
    if choice == "numpy":
        return False
    ok = _numba_available()
    if choice == "numba" and not ok:
        raise ImportError(f"{ENV_VAR}=numba but numba is not importable")
    return ok
