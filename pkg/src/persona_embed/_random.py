"""Counter-based random streams usable inside numba kernels.

Every walk / training unit gets its own splitmix64 stream derived from a
tuple of integers, so results do not depend on how work is scheduled.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def mix64(x):
    z = np.uint64(x) + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def stream_seed(seed, a, b):
    return mix64(mix64(mix64(np.uint64(seed)) ^ np.uint64(a)) ^ np.uint64(b))


@njit(cache=True)
def uniform(state):
    """Return ``(new_state, u)`` with ``u`` uniform on [0, 1)."""
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    z = z ^ (z >> np.uint64(31))
    return state, float(z >> np.uint64(11)) * _TWO53


@njit(cache=True)
def search_cumulative(cum, lo, hi, x):
    """Smallest index ``i`` in ``[lo, hi)`` with ``cum[i] > x``, clamped to ``hi - 1``."""
    hi = hi - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > x:
            hi = mid
        else:
            lo = mid + 1
    return lo
