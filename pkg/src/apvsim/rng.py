"""Counter-based random streams: any trial's draws are addressable by (seed, stream, index).

Each trial consumes one Philox counter value, i.e. exactly four 64-bit words,
so a block of trials can be generated anywhere without generating its
predecessors, and splitting work across processes never changes the numbers.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

WORDS_PER_TRIAL = 4
_U64 = (1 << 64) - 1

# stream identifiers
STREAM_OFF = 0
STREAM_ON = 1
STREAM_JITTER = 2


def trial_uniforms(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """Uniforms in (0, 1), shape (count, 4), for trials start .. start+count-1."""
    if not 0 <= seed <= _U64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    bitgen = np.random.Philox(key=seed | (stream << 64), counter=start)
    raw = bitgen.random_raw(WORDS_PER_TRIAL * count).reshape(count, WORDS_PER_TRIAL)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(u: np.ndarray) -> np.ndarray:
    """Standard normals by inverse CDF (one uniform per normal, no rejection)."""
    return ndtri(u)
