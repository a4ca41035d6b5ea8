"""Backend selection for the hot loops.

``HKD_BACKEND=numba`` (default when numba imports) compiles the pairwise
right-hand side and the RK4 stepping loop with ``@njit``.
``HKD_BACKEND=numpy`` uses the vectorized numpy right-hand side and runs the
stepping loop in the interpreter.
"""

import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

BACKENDS = ("numba", "numpy")


def backend_name(requested=None):
    """Resolve the backend name from an explicit request or ``HKD_BACKEND``."""
    name = requested or os.environ.get("HKD_BACKEND", "numba" if HAS_NUMBA else "numpy")
    name = name.strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not installed")
    return name


def njit(*args, **kwargs):
    """``numba.njit`` with cache enabled; identity decorator without numba."""
    if not HAS_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
