"""Counter-based pseudo-random primitives (splitmix64).

Used wherever a value must be a pure function of (seed, index): trivalency
edge assignment and Monte-Carlo simulation streams. Being counter-based,
results do not depend on evaluation order or worker scheduling.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = float(2.0**-53)


def splitmix64(x):
    """Finalize a uint64 (scalar or array) into a well-mixed uint64.

    Overflow is the point: all arithmetic wraps mod 2^64.
    """
    with np.errstate(over="ignore"):
        z = np.uint64(x) + _GAMMA if np.isscalar(x) else x + _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def mix_key(*parts):
    """Fold integer parts into a single uint64 stream key."""
    key = np.uint64(0)
    for p in parts:
        key = splitmix64(key ^ np.uint64(int(p) & 0xFFFFFFFFFFFFFFFF))
    return key


def counter_uniforms(key, counters):
    """Uniforms in [0, 1) addressed by (key, counter).

    ``counters`` is an integer array; the result has the same shape and is
    a pure function of (key, counter), so any subset can be evaluated in
    any order and yield identical values.
    """
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = splitmix64(c * _GAMMA + np.uint64(key))
    return (h >> np.uint64(11)).astype(np.float64) * _INV53
