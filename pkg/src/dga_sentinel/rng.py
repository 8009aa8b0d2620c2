"""Deterministic 64-bit PRNG used everywhere randomness is needed.

The generator is SplitMix64: state walks by a fixed odd constant and each
output is a bit-mixing finalizer of the new state.  The algorithm is part of
the package contract: every fixture, synthetic domain list, bootstrap sample
and derived seed must be regenerable from these few lines in any language,
so no stdlib/numpy RNG is used anywhere in the pipeline.

Streams are derived, never shared: a parent seed plus a textual label (or an
integer index) yields an independent child seed.  Consumers each get their
own stream, which keeps outputs stable when unrelated call sites add or
remove draws.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z = (z + _GAMMA) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def fnv1a64(text: str) -> int:
    """FNV-1a hash of the UTF-8 bytes of `text`, used to name streams."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_stream(seed: int, label: str) -> int:
    """Child seed for the stream named `label` under `seed`."""
    return mix64((seed & _MASK64) ^ fnv1a64(label))


def derive_substream(seed: int, index: int) -> int:
    """Child seed for the `index`-th numbered stream under `seed`."""
    return mix64((seed & _MASK64) ^ mix64(index & _MASK64))


class SplitMix64:
    """Sequential SplitMix64 generator.

    Bit-identical to the jitted copy inside the forest trainer; a property
    test holds the two implementations together.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z ^= z >> 30
        z = (z * 0xBF58476D1CE4E5B9) & _MASK64
        z ^= z >> 27
        z = (z * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        return z

    def rand_below(self, n: int) -> int:
        """Integer in [0, n). Plain modulo: the bias at 64 bits is ~n/2**64
        and accepting it keeps the contract portable."""
        if n <= 0:
            raise ValueError("rand_below needs n >= 1")
        return self.next_u64() % n

    def rand_range(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.rand_below(hi - lo + 1)

    def choice(self, seq):
        return seq[self.rand_below(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.rand_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), order randomized."""
        if k > n:
            raise ValueError("sample larger than population")
        idx = list(range(n))
        for i in range(k):
            j = i + self.rand_below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]
