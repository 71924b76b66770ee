"""Deterministic pseudo-random streams for scene sampling.

All randomness in the generator flows through :class:`Rng`, a splitmix64
stream implemented on Python integers.  The sequence for a given seed is
fixed forever (golden tests pin it) and does not depend on numpy, the
platform, or the process: this is what makes dataset generation
bit-reproducible.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(value: int) -> int:
    """One splitmix64 finalizer round; maps any 64-bit int to a well-mixed one."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Stable per-item seed for parallel work (e.g. scene i of a dataset)."""
    return mix64((seed & _MASK64) + _GOLDEN * (index + 1))


class Rng:
    """splitmix64 generator: 64-bit counter state, one mix per output."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def fork(self) -> "Rng":
        """Child stream seeded from the next output.

        Forking in a fixed order gives every subsystem its own stream, so
        adding draws to one sampler never perturbs the others.
        """
        return Rng(self.next_u64())

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low: float, high: float) -> float:
        """Uniform float in [low, high); returns low when the range is empty."""
        return low + (high - low) * self.random()

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high], both ends inclusive."""
        if high < low:
            raise ValueError(f"empty integer range [{low}, {high}]")
        span = high - low + 1
        return low + self.next_u64() % span

    def choice(self, items):
        return items[self.randint(0, len(items) - 1)]

    def shuffled(self, items) -> list:
        """Fisher-Yates shuffle of a copy of `items`."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.randint(0, i)
            out[i], out[j] = out[j], out[i]
        return out

    def unit_vector(self) -> tuple[float, float, float]:
        """Uniform direction on the unit sphere (cylindrical map, no rejection)."""
        z = self.uniform(-1.0, 1.0)
        phi = self.uniform(0.0, 2.0 * math.pi)
        r = math.sqrt(max(0.0, 1.0 - z * z))
        return (r * math.cos(phi), r * math.sin(phi), z)
