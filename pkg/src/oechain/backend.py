"""Kernel backend selection.

The hot integration loops exist twice: scalar-loop kernels compiled with
numba, and vectorized pure-numpy equivalents. OECHAIN_BACKEND picks one at
import time ("numba", "numpy", or "auto"; default auto = numba if present).
"""

import os

_request = os.environ.get("OECHAIN_BACKEND", "auto").strip().lower()

if _request in ("", "auto"):
    try:
        import numba  # noqa: F401
        ACTIVE = "numba"
    except ImportError:
        ACTIVE = "numpy"
elif _request == "numba":
    import numba  # noqa: F401  # fail loudly if explicitly requested but absent
    ACTIVE = "numba"
elif _request == "numpy":
    ACTIVE = "numpy"
else:
    raise RuntimeError(
        "OECHAIN_BACKEND must be 'numba', 'numpy', or 'auto', got %r" % _request
    )


def active() -> str:
    """Name of the kernel backend selected at import time."""
    return ACTIVE
