"""JIT switch shared by the numeric kernels.

Set ``KINOSYN_DISABLE_JIT=1`` to run every kernel through its pure-numpy
implementation instead of the numba-compiled one. The flag is read once, at
import time.
"""

import os

_FLAG = os.environ.get("KINOSYN_DISABLE_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in {"1", "true", "yes", "on"}
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` in nopython mode when numba is importable.

    Compilation is lazy, so merely importing a kernel module costs nothing
    when the numpy path is selected.
    """
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, fastmath=False)(fn)
