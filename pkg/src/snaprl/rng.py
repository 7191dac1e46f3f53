"""Small serializable PRNG owned by environment states.

Environments carry their generator inside the state they snapshot, so the
generator must have an explicit, byte-exact representation. xoshiro256**
keeps the whole state in four 64-bit words, which packs losslessly into
32 little-endian bytes.
"""

from __future__ import annotations

import struct

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step; used for seeding and for deriving stream seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Deterministically fold several integers into one 64-bit seed."""
    acc = 0x243F6A8885A308D3
    for p in parts:
        acc = splitmix64((acc ^ (p & _MASK64)) & _MASK64)
    return acc


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256:
    """xoshiro256** with splitmix64 seeding; state serializes to 32 bytes."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int) -> None:
        x = seed & _MASK64
        # splitmix64 chain, as recommended for filling the initial state
        states = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & _MASK64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            states.append(z ^ (z >> 31))
        self.s0, self.s1, self.s2, self.s3 = states

    def next_u64(self) -> int:
        result = (_rotl((self.s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (self.s1 << 17) & _MASK64
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = _rotl(self.s3, 45)
        return result

    def uniform(self, low: float, high: float) -> float:
        """Uniform double in [low, high) using the top 53 bits."""
        u = self.next_u64() >> 11
        return low + (high - low) * (u * (1.0 / (1 << 53)))

    def state_bytes(self) -> bytes:
        return struct.pack("<4Q", self.s0, self.s1, self.s2, self.s3)

    @classmethod
    def from_state_bytes(cls, raw: bytes) -> "Xoshiro256":
        if len(raw) != 32:
            raise ValueError(f"expected 32 state bytes, got {len(raw)}")
        gen = cls.__new__(cls)
        gen.s0, gen.s1, gen.s2, gen.s3 = struct.unpack("<4Q", raw)
        return gen
