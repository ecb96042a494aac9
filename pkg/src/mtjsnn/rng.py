"""Deterministic counter-based random streams.

Every stochastic decision in the simulator is a pure function of
(seed, stream tag, counter words), so outcomes never depend on call
order, array chunking, or thread schedule.  The per-decision draws use
a splitmix64-style avalanche hash evaluated elementwise over numpy
arrays of counters; bulk sequential needs (shuffles, presentation
order) use a numpy Philox generator keyed from the same hash.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Tags keeping independent random streams from colliding."""

    INIT = 1
    LEARN = 2
    READ_NOISE = 3
    SHUFFLE = 4
    PRESENTATION_ORDER = 5


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MULT1 = np.uint64(0xBF58476D1CE4E5B9)
_MULT2 = np.uint64(0x94D049BB133111EB)
# top 53 bits of the hash become the mantissa of a uniform in [0, 1)
_INV_U53 = np.float64(1.0 / (1 << 53))
_TWO_PI = 2.0 * np.pi


def _mix(x: np.ndarray) -> np.ndarray:
    """64-bit finalizer with full avalanche (splitmix64)."""
    x = (x ^ (x >> np.uint64(30))) * _MULT1
    x = (x ^ (x >> np.uint64(27))) * _MULT2
    return x ^ (x >> np.uint64(31))


def _as_u64(word) -> np.ndarray:
    return np.asarray(word).astype(np.uint64, copy=False)


def hash_words(*words) -> np.ndarray:
    """Avalanche-hash a tuple of integer words (arrays broadcast together)."""
    # uint64 arithmetic wraps modulo 2^64 by design
    with np.errstate(over="ignore"):
        h = _mix(_as_u64(words[0]) + _GOLDEN)
        for w in words[1:]:
            h = _mix((h + _GOLDEN) ^ _mix(_as_u64(w) + _GOLDEN))
    return h


def uniforms(seed: int, stream: Stream, *counters) -> np.ndarray:
    """Uniform [0, 1) draws keyed by (seed, stream, counters).

    Counter arguments broadcast together; the result has the broadcast
    shape (a 0-d array for all-scalar counters).
    """
    h = hash_words(seed, int(stream), *counters)
    return (h >> np.uint64(11)).astype(np.float64) * _INV_U53


def normals(seed: int, stream: Stream, *counters) -> np.ndarray:
    """Standard normal draws keyed like :func:`uniforms` (Box-Muller)."""
    u1 = uniforms(seed, stream, *counters, 0)
    u2 = uniforms(seed, stream, *counters, 1)
    # 1 - u1 lies in (0, 1], keeping the log finite
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(_TWO_PI * u2)


def spawn_generator(seed: int, stream: Stream, *counters) -> np.random.Generator:
    """A numpy Generator whose Philox key derives from (seed, stream, counters)."""
    key = int(hash_words(seed, int(stream), *counters))
    return np.random.Generator(np.random.Philox(key=key))
