"""numba on/off switch.

Hot kernels (Monte Carlo paths, Pruefer phase integration) are written as
plain loops and compiled with ``numba.njit``.  Setting the environment
variable ``WML_DISABLE_NUMBA=1`` swaps in a no-op decorator so the same
source runs as ordinary Python/numpy -- slower, but handy for debugging and
for machines without a working numba install.  ``benchmarks/bench_kernels.py``
compares the two paths.
"""

import os

NUMBA_DISABLED = os.environ.get("WML_DISABLE_NUMBA", "").strip() not in ("", "0")

if not NUMBA_DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_DISABLED = True

if NUMBA_DISABLED:
    import functools

    import numpy as np

    def njit(*args, **kwargs):  # noqa: F811
        def wrap(func):
            # the RNG kernels rely on uint64 wraparound, which numpy
            # reports as an overflow warning in pure-Python mode
            @functools.wraps(func)
            def run(*a, **kw):
                with np.errstate(all="ignore"):
                    return func(*a, **kw)

            return run

        if args and callable(args[0]):
            return wrap(args[0])
        return wrap
