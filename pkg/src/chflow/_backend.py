"""Kernel backend selection.

Hot numeric kernels exist in two implementations: numba-jitted loops and
vectorized numpy. The active lane is chosen once at import from the
environment variable ``CHFLOW_BACKEND``:

* ``auto`` (default) - numba if importable, else numpy
* ``numba``          - require numba, fail loudly if missing
* ``numpy``          - pure numpy/scipy fallback
"""

import os

VALID = ("auto", "numba", "numpy")


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def resolve(name: str | None = None) -> str:
    """Map a requested backend name to the concrete lane ('numba'|'numpy')."""
    if name is None:
        name = os.environ.get("CHFLOW_BACKEND", "auto").strip().lower()
    if name not in VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {VALID}")
    if name == "numba":
        if not numba_available():
            raise RuntimeError("CHFLOW_BACKEND=numba but numba is not importable")
        return "numba"
    if name == "numpy":
        return "numpy"
    return "numba" if numba_available() else "numpy"
