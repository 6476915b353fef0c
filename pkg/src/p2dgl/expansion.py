"""Exact digit extraction and cylinder geometry.

Every x in (0,1] has a unique expansion

    x = sum_i 2^-(d_1 + ... + d_i),   d_i >= 1,

obtained by iterating the map T x = 2^d x - 1 on the branch (2^-d, 2^-d+1].
Points are plain :class:`fractions.Fraction` values; no floating point is
used anywhere in this module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Tuple, Union

DigitWord = Tuple[int, ...]
PointLike = Union[Fraction, int, str]

_DYADIC_RE = re.compile(r"^\s*(\d+)\s*/\s*2\s*\^\s*(\d+)\s*$")


def as_point(x: PointLike) -> Fraction:
    """Coerce ``x`` to a reduced fraction in (0,1].

    Strings may be ``"p/q"`` or the dyadic form ``"p/2^e"``.
    """
    if isinstance(x, str):
        m = _DYADIC_RE.match(x)
        if m:
            x = Fraction(int(m.group(1)), 1 << int(m.group(2)))
        else:
            x = Fraction(x.replace(" ", ""))
    elif not isinstance(x, Fraction):
        if isinstance(x, bool) or not isinstance(x, int):
            raise TypeError(f"expected a rational point, got {type(x).__name__}")
        x = Fraction(x)
    if not 0 < x <= 1:
        raise ValueError(f"point {x} is outside (0, 1]")
    return x


def _check_word(word: Sequence[int]) -> DigitWord:
    w = tuple(int(d) for d in word)
    if not w:
        raise ValueError("empty digit word has no cylinder")
    for d in w:
        if d < 1:
            raise ValueError(f"digits must be >= 1, got {d}")
    return w


def _digit(p: int, q: int) -> int:
    # unique d with 2^(d-1) p <= q < 2^d p
    d = q.bit_length() - p.bit_length()
    return d + 1 if (p << d) <= q else d


def digit_of(x: PointLike) -> int:
    """First digit of ``x``: the d with x in (2^-d, 2^-d+1].

    Branches are left-open and right-closed, so ``digit_of(2**-k) == k + 1``.
    """
    x = as_point(x)
    return _digit(x.numerator, x.denominator)


def apply_T(x: PointLike) -> Fraction:
    """Apply the interval map T x = 2^d x - 1, d = digit_of(x)."""
    x = as_point(x)
    p, q = x.numerator, x.denominator
    if q & (q - 1) == 0:
        m, e = _t_dyadic(p, q.bit_length() - 1)
        return Fraction(m, 1 << e)
    d = _digit(p, q)
    return Fraction((p << d) - q, q)


def _t_dyadic(m: int, e: int) -> Tuple[int, int]:
    # x = m / 2^e with m odd (or m = 1, e = 0); returns T x in the same form
    b = m.bit_length()
    if m == 1 << (b - 1):
        return 1, 0
    # drop the most significant bit: T x = (m - 2^(b-1)) / 2^(b-1)
    m -= 1 << (b - 1)
    e = b - 1
    tz = (m & -m).bit_length() - 1
    return m >> tz, e - tz


def dyadic_step(m: int, e: int) -> Tuple[int, int, int]:
    """One T step on x = m / 2^e (m odd or x = 1); returns (digit, m', e')."""
    b = m.bit_length()
    d = e - b + 1 if m != 1 << (b - 1) else e - b + 2
    m2, e2 = _t_dyadic(m, e)
    return d, m2, e2


def iter_digits(x: PointLike) -> Iterator[int]:
    """Lazily generate the infinite digit stream of ``x``."""
    x = as_point(x)
    p, q = x.numerator, x.denominator
    if q & (q - 1) == 0:
        # reduced, so p is odd unless x = 1
        m, e = p, q.bit_length() - 1
        while True:
            d, m, e = dyadic_step(m, e)
            yield d
    while True:
        d = _digit(p, q)
        yield d
        p = (p << d) - q


def expand(x: PointLike, n: int) -> DigitWord:
    """The first ``n`` digits of ``x``, computed exactly."""
    if n < 0:
        raise ValueError("n must be non-negative")
    it = iter_digits(x)
    return tuple(next(it) for _ in range(n))


@dataclass(frozen=True)
class PeriodicExpansion:
    preperiod: DigitWord
    period: DigitWord

    def digits(self, n: int) -> DigitWord:
        out = list(self.preperiod[:n])
        while len(out) < n:
            out.extend(self.period[: n - len(out)])
        return tuple(out)

    def __str__(self) -> str:
        pre = ",".join(map(str, self.preperiod))
        per = ",".join(map(str, self.period))
        return f"({pre})[{per}]" if pre else f"[{per}]"


def expand_periodic(x: PointLike) -> PeriodicExpansion:
    """Split the digit stream of a rational into preperiod and minimal period.

    The orbit of p/q under T stays among fractions with the odd part of q as
    denominator, so it is eventually periodic.  By uniqueness of the expansion
    the first repeated orbit point marks both the minimal preperiod and the
    minimal period.
    """
    x = as_point(x)
    seen = {}
    digits = []
    while x not in seen:
        seen[x] = len(digits)
        digits.append(digit_of(x))
        x = apply_T(x)
    start = seen[x]
    return PeriodicExpansion(tuple(digits[:start]), tuple(digits[start:]))


def reconstruct(word: Sequence[int]) -> Fraction:
    """Partial sum sum_i 2^-(d_1+...+d_i); the left endpoint of the cylinder."""
    w = _check_word(word)
    # accumulate over a common power-of-two denominator
    total = sum(w)
    num = 0
    s = 0
    for d in w:
        s += d
        num += 1 << (total - s)
    return Fraction(num, 1 << total)


@dataclass(frozen=True)
class Cylinder:
    """The set of points whose expansion starts with ``word``: (left, right]."""

    word: DigitWord
    left: Fraction
    right: Fraction
    length: Fraction

    @property
    def rank(self) -> int:
        return len(self.word)

    def __contains__(self, x: object) -> bool:
        return isinstance(x, (Fraction, int)) and self.left < x <= self.right

    def child(self, k: int) -> "Cylinder":
        if k < 1:
            raise ValueError("digits must be >= 1")
        return cylinder(self.word + (k,))


def cylinder(word: Sequence[int]) -> Cylinder:
    w = _check_word(word)
    left = reconstruct(w)
    length = Fraction(1, 1 << sum(w))
    return Cylinder(w, left, left + length, length)


def cylinders(words: Iterable[Sequence[int]]) -> Iterator[Cylinder]:
    for w in words:
        yield cylinder(w)
