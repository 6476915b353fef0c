"""Cantor-type subsets with forced digits at sparse positions.

Two flavors are supported:

``F``  (F_M(alpha))   digit at n_k ranges over [floor(alpha n_k) + 1, floor((1 + 1/k) alpha n_k)],
                      digits elsewhere in [1, M]; n_k grows super-exponentially.
``E``  (E_M(r, alpha)) digit at n_k = k^t is forced to floor(alpha n_k^r),
                      digits elsewhere in [1, M].

Words, fundamental intervals and gaps use exact integer/rational arithmetic.
The mass distribution mu is kept in log2-space in mpmath because its values
underflow doubles after a few dozen ranks.
"""

from __future__ import annotations

import bisect
import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .dimension import WORK_PREC, solve_s_M_alpha
from .expansion import DigitWord, reconstruct


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would emit more words than allowed."""


# ------------------------------------------------------------- sequences


def _floor(x: Fraction) -> int:
    return math.floor(x)


def exact_alpha(alpha) -> Fraction:
    """alpha as an exact rational; floats are read through their shortest repr, so 0.3 is 3/10."""
    if isinstance(alpha, float):
        return Fraction(repr(alpha))
    return Fraction(alpha)


def _f_range(alpha: Fraction, k: int, n: int) -> Tuple[int, int]:
    return _floor(alpha * n) + 1, _floor(alpha * (1 + Fraction(1, k)) * n)


def generate_nk(
    alpha: float,
    K: int,
    allowed: Optional[Callable[[int], bool]] = None,
) -> Tuple[int, ...]:
    """Greedy special positions n_1 < ... < n_K for F_M(alpha).

    n_k is the least integer above (k+1)(n_1 + ... + n_{k-1}) whose forced
    digit range has more than one element.  ``allowed`` restricts n_k for
    k >= 2 to a given infinite index set.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    a = exact_alpha(alpha)
    out: List[int] = []
    total = 0
    for k in range(1, K + 1):
        n = (k + 1) * total + 1
        while True:
            lo, hi = _f_range(a, k, n)
            if hi - lo + 1 > 1 and (k == 1 or allowed is None or allowed(n)):
                break
            n += 1
        out.append(n)
        total += n
    check_nk(alpha, out)
    return tuple(out)


def check_nk(alpha: float, nk: Sequence[int]) -> None:
    a = exact_alpha(alpha)
    total = 0
    for k, n in enumerate(nk, start=1):
        if _floor(a * (1 + Fraction(1, k)) * n) - _floor(a * n) <= 1:
            raise AssertionError(f"n_{k} = {n}: forced range too narrow")
        if k > 1 and not total < Fraction(n, k):
            raise AssertionError(f"n_{k} = {n}: n_1+...+n_{k-1} >= n_{k}/{k}")
        total += n


# ----------------------------------------------------------------- specs


@dataclass(frozen=True)
class ConstructionSpec:
    flavor: str
    M: int
    alpha: float
    nk: Tuple[int, ...]
    r: Optional[float] = None
    t: Optional[int] = None
    _pos: Dict[int, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.flavor not in ("F", "E"):
            raise ValueError("flavor must be 'F' or 'E'")
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.flavor == "E":
            if self.r is None or self.t is None or not self.r > 0 or self.t < 1:
                raise ValueError("E flavor needs r > 0 and integer t >= 1")
            if not self.r + 1 / self.t < 1:
                raise ValueError(f"need r + 1/t < 1, got r={self.r}, t={self.t}")
        else:
            check_nk(self.alpha, self.nk)
        self._pos.update({n: k for k, n in enumerate(self.nk, start=1)})
        for k in range(1, len(self.nk) + 1):
            lo, hi = self.special_range(k)
            if lo < 1 or hi < lo:
                raise ValueError(f"empty forced digit range at n_{k}")

    @classmethod
    def F(cls, M: int, alpha: float, K: int = 6, allowed=None) -> "ConstructionSpec":
        return cls("F", M, alpha, generate_nk(alpha, K, allowed))

    @classmethod
    def E(cls, M: int, r: float, alpha: float, t: int, horizon: int = 10**6) -> "ConstructionSpec":
        if not r + 1 / t < 1:
            raise ValueError(f"need r + 1/t < 1, got r={r}, t={t}")
        K = 1
        while (K + 1) ** t <= horizon:
            K += 1
        return cls("E", M, alpha, tuple(k**t for k in range(1, K + 1)), r, t)

    @property
    def horizon(self) -> int:
        """Largest rank whose digit constraints are fully materialized."""
        if self.flavor == "E":
            return (len(self.nk) + 1) ** self.t - 1
        # n_{K+1} > (K+1)(n_1 + ... + n_K) under the greedy rule
        return (len(self.nk) + 1) * sum(self.nk)

    def special_index(self, pos: int) -> Optional[int]:
        """k if ``pos`` (1-based) equals n_k, else None."""
        return self._pos.get(pos)

    def special_range(self, k: int) -> Tuple[int, int]:
        n = self.nk[k - 1]
        if self.flavor == "F":
            return _f_range(exact_alpha(self.alpha), k, n)
        f = math.floor(self.alpha * n**self.r)
        return f, f

    def digit_range(self, pos: int) -> Tuple[int, int]:
        if pos > self.horizon:
            raise ValueError(f"position {pos} is beyond the materialized horizon {self.horizon}")
        k = self._pos.get(pos)
        return (1, self.M) if k is None else self.special_range(k)

    def contains(self, word: Sequence[int]) -> bool:
        for i, d in enumerate(word, start=1):
            lo, hi = self.digit_range(i)
            if not lo <= d <= hi:
                return False
        return True

    def count_words(self, n: int) -> int:
        """#D_n."""
        c = 1
        for i in range(1, n + 1):
            lo, hi = self.digit_range(i)
            c *= hi - lo + 1
        return c

    # key=value text form
    def dumps(self) -> str:
        lines = [f"flavor={self.flavor}", f"M={self.M}", f"alpha={self.alpha!r}"]
        if self.flavor == "E":
            lines += [f"r={self.r!r}", f"t={self.t}"]
        lines.append("nk=" + ",".join(map(str, self.nk)))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ConstructionSpec":
        kv = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        flavor = kv.get("flavor", "F").upper()
        M = int(kv["M"])
        alpha = float(Fraction(kv["alpha"]))
        if flavor == "E":
            r = float(Fraction(kv["r"]))
            t = int(kv["t"])
            horizon = int(kv.get("horizon", 10**6))
            return cls.E(M, r, alpha, t, horizon)
        if "nk" in kv:
            return cls("F", M, alpha, tuple(int(v) for v in kv["nk"].split(",")))
        return cls.F(M, alpha, int(kv.get("K", 6)))


# ----------------------------------------------------------- enumeration


def enumerate_words(spec: ConstructionSpec, n: int, budget: int = 10**6) -> Iterator[DigitWord]:
    """Words of D_n in lexicographic order.

    Raises :class:`BudgetExceeded` once ``budget`` words have been emitted and
    more remain.
    """
    ranges = [range(lo, hi + 1) for lo, hi in map(spec.digit_range, range(1, n + 1))]
    for i, w in enumerate(itertools.product(*ranges)):
        if i >= budget:
            raise BudgetExceeded(f"D_{n} has {spec.count_words(n)} words, budget {budget}")
        yield w


@dataclass(frozen=True)
class FundamentalInterval:
    word: DigitWord
    left: Fraction
    right: Fraction
    length: Fraction
    next_special: Optional[int]  # k when n+1 = n_k


def fundamental_interval(spec: ConstructionSpec, word: Sequence[int]) -> FundamentalInterval:
    """Union of the admissible rank-(n+1) children of I_n(word), as (left, right]."""
    w = tuple(int(d) for d in word)
    if not w:
        raise ValueError("empty word")
    if not spec.contains(w):
        raise ValueError(f"word {w} is not in D_{len(w)}")
    S = sum(w)
    lo, hi = spec.digit_range(len(w) + 1)
    base = reconstruct(w)
    left = base + Fraction(1, 1 << (S + hi))
    right = base + Fraction(1, 1 << (S + lo - 1))
    return FundamentalInterval(w, left, right, right - left, spec.special_index(len(w) + 1))


def fundamental_length(spec: ConstructionSpec, word: Sequence[int]) -> Fraction:
    """Closed-form |J(word)|: 2^-S (1 - 2^-M) off special positions, else 2^-S (2^-(lo-1) - 2^-hi)."""
    S = sum(word)
    lo, hi = spec.digit_range(len(word) + 1)
    return Fraction(1, 1 << S) * (Fraction(1, 1 << (lo - 1)) - Fraction(1, 1 << hi))


def _walk(spec: ConstructionSpec, n: int, scale: int, budget: int):
    """DFS over D_n yielding (word, digit sum, left endpoint * 2^scale)."""
    ranges = [spec.digit_range(i) for i in range(1, n + 1)]
    total = spec.count_words(n)
    if total > budget:
        raise BudgetExceeded(f"D_{n} has {total} words, budget {budget}")
    word = [0] * n

    def rec(i, s, left):
        if i == n:
            yield tuple(word), s, left
            return
        lo, hi = ranges[i]
        for d in range(lo, hi + 1):
            word[i] = d
            yield from rec(i + 1, s + d, left + (1 << (scale - s - d)))

    yield from rec(0, 0, 0)


@dataclass
class GapReport:
    rank: int
    intervals: int
    min_gap: Fraction
    min_ratio: Fraction  # min over words of gap / lower bound
    violations: List[DigitWord]
    bound: str

    @property
    def ok(self) -> bool:
        return not self.violations and self.min_gap > 0

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "intervals": self.intervals,
            "min_gap": str(self.min_gap),
            "min_gap_float": float(self.min_gap),
            "min_ratio_to_bound": float(self.min_ratio),
            "violations": [list(v) for v in self.violations[:20]],
            "bound": self.bound,
            "ok": self.ok,
        }


def gaps_at_rank(spec: ConstructionSpec, n: int, budget: int = 10**6) -> GapReport:
    """Exact nearest-neighbour gaps between all rank-n fundamental intervals.

    The lower bound is 2^-(S+M) when n+1 is free, and 2^-S 2^-hi_k when
    n+1 = n_k, with hi_k the top of the forced range.
    """
    lo, hi = spec.digit_range(n + 1)
    k = spec.special_index(n + 1)
    s_max = sum(spec.digit_range(i)[1] for i in range(1, n + 1))
    extra = hi if k is not None else spec.M
    scale = s_max + max(hi, extra) + 1
    rows = []
    for w, S, left in _walk(spec, n, scale, budget):
        jl = left + (1 << (scale - S - hi))
        jr = left + (1 << (scale - S - lo + 1))
        bound = 1 << (scale - S - (hi if k is not None else spec.M))
        rows.append((jl, jr, bound, w))
    rows.sort()
    violations = []
    min_gap = None
    min_ratio = None
    for i, (jl, jr, bound, w) in enumerate(rows):
        cands = []
        if i > 0:
            cands.append(jl - rows[i - 1][1])
        if i + 1 < len(rows):
            cands.append(rows[i + 1][0] - jr)
        if not cands:
            continue
        g = min(cands)
        if min_gap is None or g < min_gap:
            min_gap = g
        ratio = Fraction(g, bound)
        if min_ratio is None or ratio < min_ratio:
            min_ratio = ratio
        if g < bound:
            violations.append(w)
    denom = 1 << scale
    label = "G4: 2^-S 2^-hi_k" if k is not None else "G3: 2^-(S+M)"
    return GapReport(
        n,
        len(rows),
        Fraction(min_gap if min_gap is not None else denom, denom),
        min_ratio if min_ratio is not None else Fraction(0),
        violations,
        label,
    )


# -------------------------------------------------------------- measure


@dataclass(frozen=True)
class MuMeasureValue:
    """mu(J(word)) = 2^log2 with the exact pieces it was built from."""

    log2: mpmath.mpf
    widths: Tuple[int, ...]  # forced-range widths at special positions <= n
    free_count: int
    free_digit_sum: int

    @property
    def value(self) -> mpmath.mpf:
        with mpmath.workprec(WORK_PREC):
            return mpmath.power(2, self.log2)


class MassDistribution:
    """The probability measure on fundamental intervals of an F-flavor spec.

    A free position contributes (2^-alpha 2^-sigma)^s with s = s_M(alpha); a
    special position n_k divides the parent mass evenly over the forced range.
    """

    def __init__(self, spec: ConstructionSpec, s: Optional[mpmath.mpf] = None):
        if spec.flavor != "F":
            raise ValueError("the mass distribution is defined for F-flavor specs only")
        self.spec = spec
        self.s = solve_s_M_alpha(spec.M, spec.alpha).root if s is None else mpmath.mpf(s)
        with mpmath.workprec(WORK_PREC):
            a = exact_alpha(spec.alpha)
            self._alpha = mpmath.mpf(a.numerator) / a.denominator

    def _log2(self, widths: Sequence[int], free_count: int, free_sum: int) -> mpmath.mpf:
        with mpmath.workprec(WORK_PREC):
            lw = mpmath.fsum(mpmath.log(w, 2) for w in widths)
            return -lw - self.s * (self._alpha * free_count + free_sum)

    def __call__(self, word: Sequence[int]) -> MuMeasureValue:
        w = tuple(word)
        if not self.spec.contains(w):
            raise ValueError(f"word {w} is not in D_{len(w)}")
        widths = []
        free_count = free_sum = 0
        for i, d in enumerate(w, start=1):
            k = self.spec.special_index(i)
            if k is None:
                free_count += 1
                free_sum += d
            else:
                lo, hi = self.spec.special_range(k)
                widths.append(hi - lo + 1)
        return MuMeasureValue(self._log2(widths, free_count, free_sum), tuple(widths), free_count, free_sum)

    def children(self, word: Sequence[int]) -> List[Tuple[DigitWord, MuMeasureValue]]:
        w = tuple(word)
        lo, hi = self.spec.digit_range(len(w) + 1)
        return [(w + (c,), self(w + (c,))) for c in range(lo, hi + 1)]


def mu_measure(spec: ConstructionSpec, word: Sequence[int], s=None) -> MuMeasureValue:
    return MassDistribution(spec, s)(word)


def log2_sum(values: Sequence[mpmath.mpf]) -> mpmath.mpf:
    """log2 of sum 2^v, stable for very negative v."""
    with mpmath.workprec(WORK_PREC):
        m = max(values)
        return m + mpmath.log(mpmath.fsum(mpmath.power(2, v - m) for v in values), 2)


@dataclass
class MeasureCheck:
    ranks: List[int]
    rank1_total: float
    max_additivity_error: float  # |log2 parent - log2 sum(children)|
    max_total_error: float  # |log2 sum over D_n|
    words_checked: int

    @property
    def ok(self) -> bool:
        return (
            abs(self.rank1_total - 1) <= 1e-12
            and self.max_additivity_error <= 1e-12
            and self.max_total_error <= 1e-12
        )

    def to_dict(self) -> dict:
        return {
            "ranks": self.ranks,
            "rank1_total": self.rank1_total,
            "max_additivity_error": self.max_additivity_error,
            "max_total_error": self.max_total_error,
            "words_checked": self.words_checked,
            "ok": self.ok,
        }


def enumerable_ranks(spec: ConstructionSpec, budget: int) -> List[int]:
    ranks = []
    n = 1
    while n < spec.horizon and spec.count_words(n) <= budget:
        ranks.append(n)
        n += 1
    return ranks


def check_measure(spec: ConstructionSpec, budget: int = 10**6, max_rank: Optional[int] = None) -> MeasureCheck:
    """Unit mass and parent/child additivity of mu on every enumerable rank.

    Every word of D_n is enumerated.  mu depends on a word only through its
    free digit sum, so log-space arithmetic is memoised on that key.
    """
    mu = MassDistribution(spec)
    ranks = enumerable_ranks(spec, budget)
    if max_rank is not None:
        ranks = [n for n in ranks if n <= max_rank]
    cache: Dict[Tuple[int, int], mpmath.mpf] = {}
    widths_at: Dict[int, Tuple[int, ...]] = {}

    def widths(n):
        if n not in widths_at:
            widths_at[n] = tuple(
                hi - lo + 1
                for lo, hi in (spec.special_range(k) for k in range(1, len(spec.nk) + 1) if spec.nk[k - 1] <= n)
            )
        return widths_at[n]

    def log_mu(n, free_sum):
        key = (n, free_sum)
        if key not in cache:
            free_count = n - len(widths(n))
            cache[key] = mu._log2(widths(n), free_count, free_sum)
        return cache[key]

    max_add = 0.0
    max_tot = 0.0
    rank1_total = None
    checked = 0
    for n in ranks:
        mult: Dict[int, int] = {}
        for w in enumerate_words(spec, n, budget):
            fs = sum(d for i, d in enumerate(w, start=1) if spec.special_index(i) is None)
            mult[fs] = mult.get(fs, 0) + 1
            checked += 1
        with mpmath.workprec(WORK_PREC):
            total = log2_sum([log_mu(n, fs) + mpmath.log(c, 2) for fs, c in mult.items()])
            max_tot = max(max_tot, float(abs(total)))
            if n == 1:
                rank1_total = float(mpmath.power(2, total))
            lo, hi = spec.digit_range(n + 1)
            nxt_special = spec.special_index(n + 1) is not None
            for fs in mult:
                if nxt_special:
                    kids = [log_mu(n + 1, fs)] * (hi - lo + 1)
                else:
                    kids = [log_mu(n + 1, fs + c) for c in range(lo, hi + 1)]
                err = abs(log_mu(n, fs) - log2_sum(kids))
                max_add = max(max_add, float(err))
    return MeasureCheck(ranks, rank1_total if rank1_total is not None else float("nan"), max_add, max_tot, checked)


@dataclass
class HolderReport:
    epsilon: float
    ranks: List[int]
    log2_cstar: List[float]
    expected_failure_mode: bool
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "ranks": self.ranks,
            "log2_cstar": self.log2_cstar,
            "cstar": [2.0**v for v in self.log2_cstar],
            "expected_failure_mode": self.expected_failure_mode,
            "verdict": self.verdict,
        }


def holder_check(
    spec: ConstructionSpec,
    ranks: Optional[Sequence[int]] = None,
    epsilon: float = 0.1,
    budget: int = 10**6,
) -> HolderReport:
    """Empirical constant C*(n) = max mu(J) / |J|^((1-eps) s_M(alpha)) over D_n.

    C* is called non-exploding when its value at the last tested rank is at
    most twice its median over the upper half of the tested ranks.
    """
    mu = MassDistribution(spec)
    if ranks is None:
        ranks = enumerable_ranks(spec, budget)
    ranks = list(ranks)
    if not ranks:
        raise ValueError("no ranks to test")
    out = []
    with mpmath.workprec(WORK_PREC):
        expo = (1 - mpmath.mpf(epsilon)) * mu.s
        for n in ranks:
            best = None
            seen = set()
            for w in enumerate_words(spec, n, budget):
                fs = sum(d for i, d in enumerate(w, start=1) if spec.special_index(i) is None)
                key = (fs, sum(w))
                if key in seen:
                    continue
                seen.add(key)
                m = mu(w).log2
                j = fundamental_length(spec, w)
                lj = mpmath.log(j.numerator, 2) - mpmath.log(j.denominator, 2)
                v = m - expo * lj
                if best is None or v > best:
                    best = v
            out.append(float(best))
    upper = out[len(out) // 2 :]
    med = float(np.median(upper))
    verdict = out[-1] <= med + 1.0  # factor 2 in log2
    return HolderReport(epsilon, ranks, out, epsilon <= 0, bool(verdict))


# ----------------------------------------------------------- box counts


def count_cylinders_by_length(spec: Optional[ConstructionSpec], j_max: int, M: Optional[int] = None) -> List[Tuple[int, int]]:
    """(j, N(j)) for j = 0..j_max: spec-valid words of any rank with digit sum j.

    ``spec=None`` with ``M`` counts the plain bounded-digit set E_M.
    Dynamic programming over (rank, digit sum).
    """
    if j_max > 4000:
        raise ValueError("j_max must be <= 4000")
    if spec is None:
        if M is None:
            raise ValueError("need a spec or M")
        rng = lambda pos: (1, M)  # noqa: E731
    else:
        if spec.horizon < j_max:
            raise ValueError(f"spec materialized only to rank {spec.horizon}; need {j_max}")
        rng = spec.digit_range
    cur = [0] * (j_max + 1)
    cur[0] = 1
    total = list(cur)
    pos = 0
    while any(cur):
        pos += 1
        lo, hi = rng(pos)
        prefix = [0] * (j_max + 2)
        for j in range(j_max + 1):
            prefix[j + 1] = prefix[j] + cur[j]
        nxt = [0] * (j_max + 1)
        for j in range(lo, j_max + 1):
            # sum of cur[j - c] for c in [lo, hi]
            a = j - hi
            nxt[j] = prefix[j - lo + 1] - prefix[max(a, 0)]
        cur = nxt
        for j in range(j_max + 1):
            total[j] += cur[j]
    return list(enumerate(total))


# ------------------------------------------------------- point builders


@dataclass
class EPointReport:
    word: np.ndarray
    ratios: np.ndarray  # L_n / n^r, n = 1..N
    last_special: int  # k with n_k <= N < n_{k+1}
    deviation: float
    bound: float
    k0: int

    @property
    def ok(self) -> bool:
        return self.deviation <= self.bound

    def to_dict(self) -> dict:
        return {
            "N": int(self.word.size),
            "last_special_k": self.last_special,
            "L_N": int(self.word.max()),
            "ratio_N": float(self.ratios[-1]),
            "deviation": self.deviation,
            "bound": self.bound,
            "k0": self.k0,
            "ok": self.ok,
        }


def construct_E_point(r: float, alpha: float, M: int, t: int, N: int, fill: int = 1) -> EPointReport:
    """A length-N word of E_M(r, alpha) with free digits set to ``fill``.

    Between consecutive special positions n_k <= n < n_{k+1} (k >= k0) the
    running maximum equals floor(alpha n_k^r), which gives the deterministic
    bound |L_N / N^r - alpha| <= (alpha (b - a) + frac(alpha a)) / a with
    a = n_k^r, b = n_{k+1}^r.
    """
    if not r + 1 / t < 1:
        raise ValueError(f"need r + 1/t < 1, got r={r}, t={t}")
    if not 1 <= fill <= M:
        raise ValueError("fill digit must lie in [1, M]")
    word = np.full(N, fill, dtype=np.int64)
    k = 1
    k0 = None
    while k**t <= N:
        f = math.floor(alpha * (k**t) ** r)
        if f < 1:
            raise ValueError(f"forced digit at n_{k} = {k**t} is {f} < 1")
        word[k**t - 1] = f
        if k0 is None and f >= M:
            k0 = k
        k += 1
    last = k - 1
    if last < 1:
        raise ValueError("N is below the first special position")
    if k0 is None or k0 >= last:
        raise ValueError("N too small: forced digits never dominate M")
    running = np.maximum.accumulate(word)
    n = np.arange(1, N + 1, dtype=float)
    ratios = running / n**r
    a = (last**t) ** r
    b = ((last + 1) ** t) ** r
    fa = alpha * a
    bound = (alpha * (b - a) + (fa - math.floor(fa))) / a
    return EPointReport(word, ratios, last, abs(float(ratios[-1]) - alpha), bound, k0)


@dataclass
class LimsupReport:
    nk: Tuple[int, ...]
    digits: Tuple[int, ...]  # forced digit at each n_k <= N
    ratios: Tuple[float, ...]  # d_{n_k} / n_k
    in_range: Tuple[bool, ...]  # alpha < ratio <= alpha (1 + 1/k)
    running_max_ratio: Tuple[float, ...]  # L_{n_k} / n_k
    free_ratio_max: float  # max over tail free positions of d_n / n

    @property
    def ok(self) -> bool:
        return all(self.in_range) and all(
            abs(a - b) == 0 for a, b in zip(self.ratios, self.running_max_ratio)
        )

    def to_dict(self) -> dict:
        return {
            "nk": list(self.nk),
            "digits": list(self.digits),
            "ratios": list(self.ratios),
            "in_range": list(self.in_range),
            "running_max_ratio": list(self.running_max_ratio),
            "free_ratio_max": self.free_ratio_max,
            "ok": self.ok,
        }


def construct_F_point(spec: ConstructionSpec, N: int, choice: str = "max", fill: int = 1) -> np.ndarray:
    """A length-N word of F_M(alpha): forced digits at the top (or bottom) of their range."""
    if spec.flavor != "F":
        raise ValueError("F-flavor spec required")
    word = np.full(N, fill, dtype=np.int64)
    for k, n in enumerate(spec.nk, start=1):
        if n > N:
            break
        lo, hi = spec.special_range(k)
        word[n - 1] = hi if choice == "max" else lo
    if N > spec.horizon:
        raise ValueError(f"N beyond the materialized horizon {spec.horizon}")
    return word


def limsup_point_check(spec: ConstructionSpec, N: int, choice: str = "max") -> LimsupReport:
    """Check alpha < d_{n_k}/n_k <= alpha (1 + 1/k) along the special positions of a point of F_M(alpha)."""
    word = construct_F_point(spec, N, choice)
    running = np.maximum.accumulate(word)
    nks, ds, ratios, ok, rmax = [], [], [], [], []
    a = exact_alpha(spec.alpha)
    for k, n in enumerate(spec.nk, start=1):
        if n > N:
            break
        d = int(word[n - 1])
        q = Fraction(d, n)
        nks.append(n)
        ds.append(d)
        ratios.append(float(q))
        ok.append(a < q <= a * (1 + Fraction(1, k)))
        rmax.append(float(Fraction(int(running[n - 1]), n)))
    free = [i for i in range(spec.nk[0], N) if spec.special_index(i + 1) is None]
    free_max = max((word[i] / (i + 1) for i in free), default=0.0)
    return LimsupReport(tuple(nks), tuple(ds), tuple(ratios), tuple(ok), tuple(rmax), float(free_max))


# ---------------------------------------------------------------- dumps


def cylinder_dump_csv(spec: ConstructionSpec, n: int, budget: int = 10**5) -> str:
    """CSV rows (word, left, right, length, mu) for the fundamental intervals of rank n."""
    mu = MassDistribution(spec) if spec.flavor == "F" else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["word", "left", "right", "length", "mu"])
    for word in enumerate_words(spec, n, budget):
        J = fundamental_interval(spec, word)
        m = mpmath.nstr(mu(word).value, 17) if mu else ""
        w.writerow(["-".join(map(str, word)), str(J.left), str(J.right), str(J.length), m])
    return buf.getvalue()
