"""Pinned, platform-independent pseudo-random noise stream.

Telemetry must be reproducible bit-for-bit across runs, so sensor noise
comes from an explicitly specified generator rather than a library default
whose algorithm may change: splitmix64 for raw 64-bit words, mapped to
[0, 1) doubles, turned into standard-normal pairs by the Box-Muller
transform.  The exact recipe is documented in docs/determinism.md so other
implementations can match the stream.
"""

from __future__ import annotations

import math

__all__ = ["NoiseStream", "splitmix64_next"]

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output word)."""
    state = (state + _GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    z = z ^ (z >> 31)
    return state, z


class NoiseStream:
    """Deterministic standard-normal stream seeded by a 64-bit integer."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64
        self._spare: float | None = None

    def next_uniform(self) -> float:
        """Next double in [0, 1) with 53 random bits."""
        self._state, z = splitmix64_next(self._state)
        return (z >> 11) / float(1 << 53)

    def next_gauss(self) -> float:
        """Next standard-normal sample (Box-Muller, pairs cached)."""
        if self._spare is not None:
            value = self._spare
            self._spare = None
            return value
        # Shift u1 into (0, 1] so the log is finite.
        self._state, z1 = splitmix64_next(self._state)
        u1 = ((z1 >> 11) + 1) / float(1 << 53)
        self._state, z2 = splitmix64_next(self._state)
        u2 = (z2 >> 11) / float(1 << 53)
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self._spare = radius * math.sin(angle)
        return radius * math.cos(angle)
