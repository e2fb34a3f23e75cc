"""Deterministic pseudo-random number generation for stream synthesis.

Stream generators must be bit-reproducible from a seed, independent of
platform and interpreter build, so experiment reports can be compared
byte for byte across reruns. The stdlib Mersenne Twister would work on
CPython today, but its float paths are not guaranteed stable across
implementations, so we pin the algorithm ourselves.

The generator is splitmix64: a 64-bit Weyl sequence (increment
0x9E3779B97F4A7C15) passed through a two-round xor-multiply finalizer.
It is tiny, passes BigCrush, and every output is a pure function of
``seed + k * gamma``, which makes the sequence trivially portable.

Uniform doubles take the top 53 bits of an output word; Gaussians use
Box-Muller on two uniforms (with the usual spare caching).
"""

from __future__ import annotations

import math
from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 2.0 ** -53

_T = TypeVar("_T")


class SplitMix64:
    """Seedable splitmix64 generator with the handful of draws we need."""

    __slots__ = ("_state", "_spare")

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64
        self._spare: float | None = None

    def next_u64(self) -> int:
        """Advance the Weyl sequence and return the next 64-bit word."""
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def bernoulli(self, p: float) -> float:
        """1.0 with probability p, else 0.0."""
        return 1.0 if self.uniform() < p else 0.0

    def gauss(self, mu: float, sigma: float) -> float:
        """Normal draw via Box-Muller; one uniform pair yields two values."""
        spare = self._spare
        if spare is not None:
            self._spare = None
            return mu + sigma * spare
        # u1 in (0, 1]: avoid log(0) by flipping the half-open interval
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare = r * math.sin(theta)
        return mu + sigma * (r * math.cos(theta))

    def choice(self, values: Sequence[_T]) -> _T:
        """Uniform pick from a non-empty sequence."""
        if not values:
            raise ValueError("cannot choose from an empty sequence")
        return values[int(self.uniform() * len(values))]
