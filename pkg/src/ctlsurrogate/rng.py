"""Portable seeded PRNG: SplitMix64 seeding feeding xoshiro256**.

Both algorithms are fully specified by Blackman & Vigna; any implementation
seeded the same way produces the same stream, which is what makes generated
datasets reproducible across languages.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step. Returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Mix a sequence of integers into one 64-bit seed.

    Used to derive per-record seeds as ``derive_seed(master, i, stream)``.
    """
    state = 0
    out = 0
    for p in parts:
        state, out = splitmix64(state ^ (p & MASK64))
        state = out
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** 1.0 seeded from a 64-bit integer via SplitMix64."""

    __slots__ = ("s",)

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        sm = seed
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        # largest multiple of n that fits in 2**64
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, walking from the end."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
