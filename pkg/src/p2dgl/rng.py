"""Counter-based random digit streams.

A Lebesgue-random point of (0,1] is represented only through its digit
sequence, which is i.i.d. with P(d = k) = 2^-k.  Each digit is produced from
one 64-bit word of a Philox4x64 stream as 1 + (number of trailing zero bits),
i.e. by counting fair coin flips up to the first head.  The Philox key is
derived from (master seed, stream index, purpose) and the counter from the
digit position, so any digit can be regenerated independently of how work is
split between workers.
"""

from __future__ import annotations

import os
from typing import Iterator, Optional

import numpy as np

DEFAULT_SEED = 0x5EED_2D61
SEED_ENV = "P2DGL_SEED"

_MASK64 = (1 << 64) - 1
_WORDS_PER_COUNTER = 4  # Philox4x64 yields four words per counter step

# purpose tags folded into the key
DIGITS = 0
EXTENSION = 1
UNIFORM = 2


def master_seed(seed: Optional[int] = None) -> int:
    """Resolve the master seed: explicit value, else $P2DGL_SEED, else default."""
    if seed is None:
        env = os.environ.get(SEED_ENV)
        seed = int(env, 0) if env else DEFAULT_SEED
    return int(seed) & _MASK64


def _bitgen(seed: int, stream: int, purpose: int, position: int = 0, extra: tuple = ()) -> np.random.Philox:
    key = (int(stream), int(purpose)) + tuple(int(v) for v in extra)
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=key)
    bg = np.random.Philox(ss)
    block, skip = divmod(position, _WORDS_PER_COUNTER)
    if block:
        bg.advance(block)
    if skip:
        bg.random_raw(skip)
    return bg


def raw_words(seed: int, stream: int, start: int, count: int, purpose: int = DIGITS) -> np.ndarray:
    """``count`` uint64 words starting at word ``start`` of the keyed stream."""
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    return _bitgen(seed, stream, purpose, start).random_raw(count)


def _trailing_zeros(words: np.ndarray) -> np.ndarray:
    low = words & (~words + np.uint64(1))
    return np.bitwise_count(low - np.uint64(1)).astype(np.int64)


def words_to_digits(words: np.ndarray) -> np.ndarray:
    """Geometric(1/2) digits from 64-bit words; a zero word reads as 65."""
    return _trailing_zeros(words) + 1


class DigitStream:
    """Reproducible i.i.d. digit sequence with P(d = k) = 2^-k.

    Positions are 0-based internally; ``take(n)`` returns d_1..d_n.
    """

    def __init__(self, seed: Optional[int] = None, stream: int = 0):
        self.seed = master_seed(seed)
        self.stream = int(stream)

    def __repr__(self) -> str:
        return f"DigitStream(seed={self.seed:#x}, stream={self.stream})"

    def digits(self, start: int, count: int) -> np.ndarray:
        words = raw_words(self.seed, self.stream, start, count)
        out = words_to_digits(words)
        zero = np.flatnonzero(words == 0)
        for i in zero:
            # all 64 flips were tails: keep flipping on a position-keyed side stream
            out[i] = 64 + self._extension(start + int(i))
        return out

    def _extension(self, position: int) -> int:
        bg = _bitgen(self.seed, self.stream, EXTENSION, extra=(position,))
        flips = 0
        while True:
            w = int(bg.random_raw(1)[0])
            if w:
                return flips + (w & -w).bit_length()
            flips += 64

    def take(self, n: int) -> np.ndarray:
        return self.digits(0, n)

    def blocks(self, n: int, block: int = 1 << 20) -> Iterator[np.ndarray]:
        """Yield d_1..d_n in consecutive chunks of at most ``block`` digits."""
        pos = 0
        while pos < n:
            c = min(block, n - pos)
            yield self.digits(pos, c)
            pos += c

    def __iter__(self) -> Iterator[int]:
        pos = 0
        while True:
            for d in self.digits(pos, 4096):
                yield int(d)
            pos += 4096


def sample_stream(seed: Optional[int] = None, stream: int = 0) -> DigitStream:
    return DigitStream(seed, stream)


def uniform_numerators(seed: int, stream: int, count: int, bits: int) -> np.ndarray:
    """``count`` integers uniform on {1, ..., 2^bits}; m / 2^bits is uniform on the dyadic grid of (0,1]."""
    if not 1 <= bits <= 62:
        raise ValueError("bits must be in [1, 62]")
    words = raw_words(seed, stream, 0, count, UNIFORM)
    return (words >> np.uint64(64 - bits)).astype(np.int64) + 1
