"""Per-trial random streams derived from a master seed.

Each trial gets its own counter-based Philox generator keyed by a
splitmix64 mix of (master seed, trial index), so trials never share a stream
and results do not depend on execution order.
"""
from __future__ import annotations

import numpy as np

ALGORITHM = "philox4x64-10/splitmix64"
_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, index: int) -> int:
    return splitmix64(splitmix64(master & _MASK) ^ (index & _MASK))


def stream(master: int, index: int = 0) -> np.random.Generator:
    key = derive_seed(master, index)
    return np.random.Generator(np.random.Philox(key=[key, splitmix64(key)]))


def as_generator(seed_or_gen) -> np.random.Generator:
    if isinstance(seed_or_gen, np.random.Generator):
        return seed_or_gen
    return stream(int(seed_or_gen), 0)


def draw_points(dist, m: int, gen: np.random.Generator) -> np.ndarray:
    """``m`` i.i.d. point indices from ``dist``."""
    if m <= 0:
        return np.zeros(0, dtype=np.int64)
    cdf = np.cumsum(np.asarray(dist.weights, dtype=np.float64))
    u = gen.random(m) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, dist.n - 1).astype(np.int64)
