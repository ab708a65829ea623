"""Deterministic 64-bit PRNG and shuffle, shared by every deck shuffle.

This module is normative: any other implementation that wants to
reproduce roomkit shuffles byte-for-byte must implement exactly the
algorithms below. All arithmetic is modulo 2**64.

Seed expansion — splitmix64 (Steele, Lea, Flood):

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB
    output: z XOR (z >> 31)

Generator — xoshiro256** (Blackman, Vigna), state s[0..3] initialized
with four successive splitmix64 outputs of the seed:

    result <- rotl64(s[1] * 5, 7) * 9
    t <- s[1] << 17
    s[2] ^= s[0]; s[3] ^= s[1]; s[1] ^= s[2]; s[0] ^= s[3]
    s[2] ^= t; s[3] <- rotl64(s[3], 45)

Bounded draw: next_below(n) = next_u64() mod n. The modulo bias is
irrelevant at card-deck sizes and the simple rule keeps cross-language
agreement trivial.

Shuffle — Fisher–Yates over the input order:

    for i from len-1 down to 1:
        j <- next_below(i + 1)
        swap a[i], a[j]

Per-deal seeds: deal k of a match seeded with S uses the k-th output
(0-based) of a splitmix64 stream with initial state S.
"""

from __future__ import annotations

from typing import Iterator, Sequence, TypeVar

MASK64 = (1 << 64) - 1

T = TypeVar("T")


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    """splitmix64 stream; used for seed expansion and per-deal seed derivation."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** seeded via splitmix64."""

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64() for _ in range(4)]

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def next_below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % n


def fisher_yates(items: Sequence[T], seed: int) -> list[T]:
    """Deterministic permutation of items; see module docstring for the algorithm."""
    rng = Xoshiro256StarStar(seed)
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def seed_stream(seed: int) -> Iterator[int]:
    """Infinite stream of derived seeds (per-deal seeds take the k-th output)."""
    sm = SplitMix64(seed)
    while True:
        yield sm.next_u64()
