"""Bit-vector plumbing shared by the polynomial and protocol layers.

Conventions (used everywhere, never locally overridden):

* An *assignment* is a tuple of ints in {0, 1} of length ``n``; position 0
  holds x_1.
* The *index* of an assignment is the integer whose most significant bit
  is x_1, i.e. ``assignments(n)`` enumerates indices 0, 1, ..., 2**n - 1
  in order (this is itertools.product((0, 1), repeat=n)).
* Bit *strings* are written the same way: "01" means x_1=0, x_2=1.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np


def parse_bits(s: str) -> tuple[int, ...]:
    """Parse "0110" into (0, 1, 1, 0). Whitespace is ignored."""
    s = "".join(s.split())
    if not s or any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return tuple(int(c) for c in s)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


def assignments(n: int) -> Iterator[tuple[int, ...]]:
    """All assignments of n bits, in index order (x_1 is the MSB)."""
    return product((0, 1), repeat=n)


def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    """Inverse of the index convention: bit i is x_{i+1}."""
    if not 0 <= index < 1 << n:
        raise ValueError(f"index {index} out of range for {n} bits")
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def bits_to_index(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def bit_matrix(n: int) -> np.ndarray:
    """(2**n, n) uint8 array; row i is index_to_bits(i, n).

    Used for vectorized truth-table evaluation. Guarded by callers
    (n <= 24 keeps this under 512 MiB)."""
    idx = np.arange(1 << n, dtype=np.uint32)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def iter_bit_chunks(bits: Sequence[int], sizes: Iterable[int]) -> Iterator[tuple[int, ...]]:
    """Split an assignment into consecutive chunks of the given sizes."""
    pos = 0
    for size in sizes:
        yield tuple(bits[pos : pos + size])
        pos += size
    if pos != len(bits):
        raise ValueError(f"chunk sizes sum to {pos}, assignment has {len(bits)} bits")


def rand_below(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound) for arbitrary-precision bounds.

    numpy's integers() stops at 64 bits; beyond that we compose 32-bit
    words and reject out-of-range draws (expected < 2 draws per call)."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound <= 1 << 63:
        return int(rng.integers(0, bound))
    nbits = bound.bit_length()
    nwords = (nbits + 31) // 32
    while True:
        value = 0
        for word in rng.integers(0, 1 << 32, size=nwords, dtype=np.uint64):
            value = (value << 32) | int(word)
        value >>= nwords * 32 - nbits
        if value < bound:
            return value
