"""Deterministic random streams based on the splitmix64 generator.

Every stochastic choice in the pipeline (weight init, shuffles, trial
sampling) draws from a SplitMix64 stream so that runs are reproducible
bit-for-bit from a single integer seed, independent of numpy's global state.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed: the (index+1)-th output of a splitmix64
    stream started at ``seed``. Used to give each HPO trial its own stream."""
    if index < 0:
        raise ValueError("index must be >= 0")
    state = seed & _MASK64
    out = 0
    for _ in range(index + 1):
        out = splitmix64(state)
        state = (state + _GOLDEN) & _MASK64
    return out


class SplitMix64:
    """Stateful splitmix64 stream with the handful of draws the pipeline needs."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        out = splitmix64(self._state)
        self._state = (self._state + _GOLDEN) & _MASK64
        return out

    def next_float(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def next_floats(self, count: int) -> np.ndarray:
        """Vectorized batch of uniform [0,1) doubles, identical to ``count``
        consecutive next_float() calls. Needed so multi-million-weight inits
        stay fast without changing the stream."""
        idx = np.arange(count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._state) + idx * np.uint64(_GOLDEN) + np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self._state = (self._state + count * _GOLDEN) & _MASK64
        return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.next_float()

    def log_uniform(self, low: float, high: float) -> float:
        if low <= 0 or high < low:
            raise ValueError("log_uniform requires 0 < low <= high")
        if low == high:
            return low
        return math.exp(self.uniform(math.log(low), math.log(high)))

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high] inclusive, via rejection sampling."""
        if high < low:
            raise ValueError("randint requires low <= high")
        span = high - low + 1
        # Rejection keeps the distribution exactly uniform.
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % span)
        while True:
            u = self.next_u64()
            if u < limit:
                return low + (u % span)

    def choice(self, items):
        if not items:
            raise ValueError("choice on empty sequence")
        return items[self.randint(0, len(items) - 1)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]
