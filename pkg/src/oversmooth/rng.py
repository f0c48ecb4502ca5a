"""Deterministic random numbers: splitmix64 seeding xoshiro256++.

Both generators are ports of the public-domain reference implementations by
Blackman and Vigna, written with plain Python integers masked to 64 bits so
every platform produces the identical stream. Floats in [0, 1) are formed
from the top 53 bits of each 64-bit word.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameter

_MASK64 = (1 << 64) - 1
_INV53 = 2.0 ** -53


def _splitmix64_next(state: int) -> tuple[int, int]:
    # One step of splitmix64: returns (new_state, output word).
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def splitmix64_stream(seed: int, count: int) -> list[int]:
    """First ``count`` outputs of a splitmix64 stream started at ``seed``."""
    state = seed & _MASK64
    out = []
    for _ in range(count):
        state, word = _splitmix64_next(state)
        out.append(word)
    return out


def subseed(master: int, index: int) -> int:
    """Derive the ``index``-th 64-bit lane seed from a master seed.

    Defined as output word ``index`` (0-based) of the splitmix64 stream
    seeded with ``master``. Nest calls to build seed trees.
    """
    if index < 0:
        raise InvalidParameter(f"subseed index must be >= 0, got {index}")
    state = master & _MASK64
    word = 0
    for _ in range(index + 1):
        state, word = _splitmix64_next(state)
    return word


class Xoshiro256pp:
    """xoshiro256++ with a splitmix64-seeded state.

    >>> Xoshiro256pp(1).next_u64() == Xoshiro256pp(1).next_u64()
    True
    """

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state, word = _splitmix64_next(state)
            s.append(word)
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        x = (s0 + s3) & _MASK64
        result = ((((x << 23) | (x >> 41)) & _MASK64) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Next float in [0, 1), from the top 53 bits of the next word."""
        return (self.next_u64() >> 11) * _INV53

    def uniform(self, low: float, high: float) -> float:
        if not high > low:
            raise InvalidParameter(f"uniform needs high > low, got [{low}, {high})")
        return low + (high - low) * self.random()

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) by 53-bit scaling (desk-scale bounds)."""
        if bound < 1:
            raise InvalidParameter(f"randbelow needs bound >= 1, got {bound}")
        return int(self.random() * bound)

    def fill(self, count: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Array of ``count`` uniforms in [low, high), in stream order.

        The generator loop is inlined with local bindings; at desk scale the
        pure-Python stream is the simulation's hot path.
        """
        if count < 0:
            raise InvalidParameter(f"fill count must be >= 0, got {count}")
        if not high > low:
            raise InvalidParameter(f"fill needs high > low, got [{low}, {high})")
        mask = _MASK64
        span = high - low
        s0, s1, s2, s3 = self._s
        out = np.empty(count, dtype=np.float64)
        for i in range(count):
            x = (s0 + s3) & mask
            word = ((((x << 23) | (x >> 41)) & mask) + s0) & mask
            t = (s1 << 17) & mask
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & mask
            out[i] = low + span * ((word >> 11) * _INV53)
        self._s = [s0, s1, s2, s3]
        return out

    def matrix(self, rows: int, cols: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Uniform matrix filled in row-major draw order."""
        return self.fill(rows * cols, low, high).reshape(rows, cols)
