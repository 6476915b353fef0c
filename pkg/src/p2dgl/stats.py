"""Monte Carlo over Lebesgue-random points, and the exact oracles it is checked against.

A random x in (0,1] is represented only by its digits, which are i.i.d. with
P(d = k) = 2^-k.  Consequently P(d_n >= m) = 2^(1-m) for integer m >= 1 and
P(L_n <= m) = (1 - 2^-m)^n, and every statistic below has an exact oracle.

Events d_n >= phi(n) with real phi are read as d_n >= ceil(phi(n)) on both
the simulation and the oracle side.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special, stats

from .report import ExperimentReport
from .rng import DigitStream, master_seed, uniform_numerators

DigitsLike = Union[DigitStream, Sequence[int], np.ndarray]

LN2 = math.log(2.0)
LOGLOG_FLOOR = 3  # log2 log n is evaluated at max(n, 3)


# ------------------------------------------------------------------ phi


@dataclass(frozen=True)
class PhiSpec:
    """phi(n) = a n^r + b log2 n + c log2 log n + c0 (inner log natural)."""

    a: float = 0.0
    r: float = 1.0
    b: float = 0.0
    c: float = 0.0
    c0: float = 0.0

    _NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
    _TERM = re.compile(
        rf"^(?P<coef>{_NUM})?\*?"
        rf"(?P<body>log2\(?log\(?n\)?\)?|log2logn|log2\(?n\)?|n(?:\^|\*\*)(?P<r>\d+/\d+|{_NUM})|n)?$"
    )

    @classmethod
    def parse(cls, text: str) -> "PhiSpec":
        """Parse sums of a*n^r, b*log2n, c*log2log n and constants.

        >>> PhiSpec.parse("log2n + 2log2log n")
        PhiSpec(a=0.0, r=1.0, b=1.0, c=2.0, c0=0.0)
        """
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty phi")
        for a_, b_ in (("+-", "-"), ("-+", "-"), ("--", "+"), ("++", "+")):
            s = s.replace(a_, b_)
        if s[0] not in "+-":
            s = "+" + s
        # split on signs, but not inside exponents such as 1e-05
        pieces = re.split(r"(?<![0-9.][eE])(?=[+-])", s)
        parts = [(p[0], p[1:]) for p in pieces if p]
        if any(not t for _, t in parts):
            raise ValueError(f"cannot parse phi: {text!r}")
        a = b = c = c0 = 0.0
        r = 1.0
        for sgn, term in parts:
            sign = -1.0 if sgn == "-" else 1.0
            m = cls._TERM.match(term)
            if not m:
                raise ValueError(f"cannot parse phi term {term!r}")
            body = m.group("body")
            coef = m.group("coef")
            if not body:
                if coef is None:
                    raise ValueError(f"cannot parse phi term {term!r}")
                c0 += sign * float(coef)
                continue
            k = sign * (float(coef) if coef else 1.0)
            if body.startswith("log2log") or body.startswith("log2(log"):
                c += k
            elif body.startswith("log2"):
                b += k
            else:
                if a:
                    raise ValueError("only one power term a*n^r is supported")
                a = k
                r = float(Fraction(m.group("r"))) if m.group("r") else 1.0
        return cls(a, r, b, c, c0)

    @classmethod
    def constant(cls, value: float) -> "PhiSpec":
        return cls(c0=float(value))

    def __str__(self) -> str:
        terms = []
        if self.a:
            terms.append(f"{self.a:.12g}*n^{self.r:.12g}")
        if self.b:
            terms.append(f"{self.b:.12g}*log2n")
        if self.c:
            terms.append(f"{self.c:.12g}*log2log n")
        if self.c0 or not terms:
            terms.append(f"{self.c0:.12g}")
        return " + ".join(terms)

    def __call__(self, n) -> float:
        """phi(n) for a positive integer n (arbitrary size)."""
        v = self.c0
        if self.a:
            try:
                v += self.a * math.exp(self.r * math.log(n))
            except OverflowError:
                return math.copysign(math.inf, self.a)
        if self.b:
            v += self.b * math.log2(n)
        if self.c:
            v += self.c * math.log2(math.log(max(n, LOGLOG_FLOOR)))
        return v

    def values(self, N: int) -> np.ndarray:
        """phi(1..N) as a float array."""
        n = np.arange(1, N + 1, dtype=float)
        v = np.full(N, float(self.c0))
        if self.a:
            v += self.a * n**self.r
        if self.b:
            v += self.b * np.log2(n)
        if self.c:
            v += self.c * np.log2(np.log(np.maximum(n, LOGLOG_FLOOR)))
        return v

    def thresholds(self, N: int) -> np.ndarray:
        """Integer thresholds ceil(phi(n)) for n = 1..N (inf allowed)."""
        return np.ceil(self.values(N))

    def threshold(self, n) -> float:
        return math.ceil(self(n)) if math.isfinite(self(n)) else math.inf

    def series_converges(self) -> bool:
        """Whether sum 2^-phi(n) < infinity (Bertrand-type classification)."""
        if self.a > 0 and self.r > 0:
            return True
        if self.a < 0 and self.r > 0:
            return False
        b = self.b + (self.a if self.r == 0 else 0.0)
        if b != 1.0:
            return b > 1.0
        return self.c > 1.0


# -------------------------------------------------------------- oracles


def event_probabilities(phi: PhiSpec, N: int) -> np.ndarray:
    """p_n = P(d_n >= phi(n)) = 2^(1 - max(1, ceil phi(n))), n = 1..N."""
    m = np.maximum(phi.thresholds(N), 1.0)
    return np.exp2(1.0 - m)


def expected_events(phi: PhiSpec, N: int) -> float:
    return math.fsum(event_probabilities(phi, N))


def window_edges(N: int) -> List[Tuple[int, int]]:
    """Dyadic windows [2^j, 2^(j+1)) intersected with [1, N], as inclusive (start, end)."""
    out = []
    j = 0
    while (1 << j) <= N:
        out.append((1 << j, min((1 << (j + 1)) - 1, N)))
        j += 1
    return out


def window_hit_probabilities(phi: PhiSpec, N: int) -> np.ndarray:
    """1 - prod_{n in window} (1 - p_n) for each dyadic window."""
    p = event_probabilities(phi, N)
    out = []
    for s, e in window_edges(N):
        q = p[s - 1 : e]
        if np.any(q >= 1.0):
            out.append(1.0)
        else:
            out.append(-math.expm1(math.fsum(np.log1p(-q))))
    return np.array(out)


def _block_end(phi: PhiSpec, start: int, m: int) -> int:
    """Largest n >= start with phi(n) <= m (phi non-decreasing from ``start``)."""
    hi = max(start, 1) * 2
    while phi(hi) <= m:
        hi *= 2
    lo = start
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if phi(mid) <= m:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class TailBound:
    N0: int
    exact_part: float  # sum of p_n over N0 < n <= X
    remainder: float  # integral bound for n > X
    X_log2: int

    @property
    def upper(self) -> float:
        return self.exact_part + self.remainder


def _remainder(phi: PhiSpec, X_log2: int) -> float:
    # sum_{n > X} 2 * 2^-phi(n) <= integral over u = ln n in (ln X, inf)
    lnX = X_log2 * LN2

    def f(u):
        e = -LN2 * phi.c0 - phi.b * u + u
        if phi.a:
            e -= LN2 * phi.a * math.exp(min(phi.r * u, 700.0))
        if phi.c:
            e -= phi.c * math.log(u)
        return 2.0 * math.exp(e)

    val, _ = integrate.quad(f, lnX, math.inf, limit=200)
    return val


def tail_expectation(phi: PhiSpec, N0: int, X_log2: int = 1024) -> TailBound:
    """Upper bound on sum_{n > N0} P(d_n >= phi(n)).

    Summed exactly in blocks of constant ceil(phi) up to X = 2^X_log2, plus an
    integral-test bound on the rest (needs a, b, c >= 0 so phi is increasing).
    """
    if min(phi.a, phi.b, phi.c) < 0:
        raise ValueError("tail bound needs non-negative coefficients")
    if not phi.series_converges():
        return TailBound(N0, math.inf, math.inf, X_log2)
    X = 1 << X_log2
    total = 0.0
    n = max(N0 + 1, LOGLOG_FLOOR)
    for k in range(N0 + 1, n):
        total += 2.0 ** (1 - max(1, math.ceil(phi(k))))
    while n <= X:
        m = max(1, math.ceil(phi(n)))
        end = min(_block_end(phi, n, m), X)
        total += (end - n + 1) * 2.0 ** (1 - m)
        n = end + 1
    return TailBound(N0, total, _remainder(phi, X_log2), X_log2)


def find_N0(phi: PhiSpec, target: float = 0.1, X_log2: int = 1024) -> TailBound:
    """Smallest N0 (to block resolution) whose tail expectation bound is below ``target``."""
    if not phi.series_converges():
        raise ValueError("series diverges; no finite N0")
    X = 1 << X_log2
    rem = _remainder(phi, X_log2)
    if rem >= target:
        raise ValueError("remainder bound alone exceeds target; raise X_log2")
    blocks = []
    n = LOGLOG_FLOOR
    while n <= X:
        m = max(1, math.ceil(phi(n)))
        end = min(_block_end(phi, n, m), X)
        blocks.append((n, end, 2.0 ** (1 - m)))
        n = end + 1
    # suffix sums from the back
    acc = rem
    for start, end, p in reversed(blocks):
        block_sum = (end - start + 1) * p
        if acc + block_sum >= target:
            # N0 inside this block: tail = acc + (end - N0) p < target
            need = math.floor((target - acc) / p)
            N0 = end - need
            while acc + (end - N0) * p >= target:
                N0 += 1
            return TailBound(N0, acc - rem + (end - N0) * p, rem, X_log2)
        acc += block_sum
    return TailBound(0, acc - rem, rem, X_log2)


def ln_cdf_exact(n: int, m: int) -> Tuple[Fraction, float]:
    """P(L_n <= m) = (1 - 2^-m)^n, exactly and as a float."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    q = Fraction((1 << m) - 1, 1 << m) ** n
    return q, ln_cdf(n, m)


def ln_cdf(n: int, m: float) -> float:
    if m < 1:
        return 0.0
    return math.exp(n * math.log1p(-(2.0 ** -math.floor(m))))


def ln_cdf_bruteforce(n: int, m: int) -> Fraction:
    """Sum of 2^-(d_1+...+d_n) over digit words with all digits <= m."""
    top = n * m
    total = 0
    for w in product(range(1, m + 1), repeat=n):
        total += 1 << (top - sum(w))
    return Fraction(total, 1 << top)


def ln_quantile(n: int, q: float) -> int:
    """Smallest m with P(L_n <= m) >= q."""
    m = 1
    while ln_cdf(n, m) < q:
        m += 1
    return m


def ln_expectation(n: int) -> float:
    """E[L_n] = sum_{m >= 0} P(L_n > m)."""
    total = 1.0
    m = 1
    while True:
        t = 1.0 - ln_cdf(n, m)
        total += t
        if t < 1e-18 and m > 2:
            return total
        m += 1


# ------------------------------------------------------- per-stream ops


def _digits(stream: DigitsLike, N: Optional[int] = None) -> np.ndarray:
    if isinstance(stream, DigitStream):
        if N is None:
            raise ValueError("N is required for a DigitStream")
        return stream.take(N)
    d = np.asarray(stream, dtype=np.int64)
    return d if N is None else d[:N]


def bb_event_indices(stream: DigitsLike, phi: PhiSpec, N: int) -> np.ndarray:
    """1-based indices n <= N with d_n >= phi(n)."""
    if N < 3:
        raise ValueError("N must be >= 3")
    d = _digits(stream, N)
    return np.flatnonzero(d >= phi.thresholds(len(d))) + 1


def ln_trajectory(stream: DigitsLike, N: Optional[int] = None) -> np.ndarray:
    """Running maxima L_1..L_N."""
    d = _digits(stream, N)
    if d.size < 1:
        raise ValueError("N must be >= 1")
    return np.maximum.accumulate(d)


@dataclass
class GphiReport:
    indices: np.ndarray  # n with L_n >= phi(n)
    witnesses: np.ndarray  # m_n <= n with d_{m_n} = L_n
    witness_ok: np.ndarray  # d_{m_n} >= phi(m_n)
    precondition_ok: bool  # phi grows over the tested range

    @property
    def ok(self) -> bool:
        return bool(self.precondition_ok and np.all(self.witness_ok))

    def to_dict(self) -> dict:
        return {
            "events": int(self.indices.size),
            "distinct_witnesses": int(np.unique(self.witnesses).size),
            "all_witnesses_valid": bool(np.all(self.witness_ok)),
            "precondition_ok": self.precondition_ok,
            "ok": self.ok,
        }


def gphi_subset_check(stream: DigitsLike, phi: PhiSpec, N: Optional[int] = None) -> GphiReport:
    """Every n with L_n >= phi(n) has a witness m_n <= n with d_{m_n} >= phi(m_n).

    The witness is the first position attaining the running maximum.
    """
    d = _digits(stream, N)
    vals = phi.values(d.size)
    if np.any(np.diff(vals) < 0):
        raise ValueError("phi must be non-decreasing over the tested range")
    grows = bool(vals[-1] > vals[0])
    th = np.ceil(vals)
    running = np.maximum.accumulate(d)
    # first index where each new running maximum was set
    is_new = np.empty(d.size, dtype=bool)
    is_new[0] = True
    is_new[1:] = running[1:] > running[:-1]
    argmax = np.maximum.accumulate(np.where(is_new, np.arange(d.size), 0))
    idx = np.flatnonzero(running >= th)
    wit = argmax[idx]
    ok = d[wit] >= th[wit]
    return GphiReport(idx + 1, wit + 1, ok, grows)


# ------------------------------------------------------------- parallel


def _map_streams(fn: Callable, args: Sequence[tuple], workers: int) -> list:
    """Ordered map; results do not depend on ``workers``."""
    if workers <= 1 or len(args) < 2:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*args), chunksize=max(1, len(args) // (4 * workers))))


# --------------------------------------------------------- digit law


def _pair_table(d: np.ndarray, cap: int) -> np.ndarray:
    a = np.minimum(d[0:-1:2], cap + 1)
    b = np.minimum(d[1::2], cap + 1)
    n = min(a.size, b.size)
    t = np.zeros((cap + 1, cap + 1), dtype=np.int64)
    np.add.at(t, (a[:n] - 1, b[:n] - 1), 1)
    return t


def _independence_chi2(table: np.ndarray) -> Tuple[float, int, float]:
    t = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if t.shape[0] < 2 or t.shape[1] < 2:
        return 0.0, 0, 1.0
    res = stats.chi2_contingency(t, correction=False)
    return float(res.statistic), int(res.dof), float(res.pvalue)


def digit_law_test(
    seed: Optional[int] = None,
    K: int = 10**6,
    kmax: int = 12,
    digits: Optional[np.ndarray] = None,
    stream: int = 0,
) -> ExperimentReport:
    """Digit frequencies against 2^-k, a pooled chi-square, and a pair-independence chi-square.

    Pairs are disjoint consecutive digits (d_1,d_2), (d_3,d_4), ... so the
    contingency cells are multinomial.
    """
    if K < 10**4:
        raise ValueError(f"K = {K} is below the minimum sample size 10^4")
    seed = master_seed(seed)
    d = DigitStream(seed, stream).take(K) if digits is None else np.asarray(digits, dtype=np.int64)[:K]
    if d.size < K:
        raise ValueError("not enough digits supplied")
    wide = K < 10**5
    z = 4.0 if wide else 3.0
    rep = ExperimentReport("digit-law", seed, {"K": K, "kmax": kmax, "stream": stream})
    counts = np.bincount(np.minimum(d, kmax + 1), minlength=kmax + 2)[1:]
    freq = counts / K
    for k in range(1, kmax + 1):
        p = 2.0**-k
        rep.add(f"freq[{k}]", freq[k - 1], p, z * math.sqrt(p * (1 - p) / K))
    p_tail = 2.0**-kmax
    rep.add(f"freq[>{kmax}]", freq[kmax], p_tail, z * math.sqrt(p_tail * (1 - p_tail) / K))

    # goodness of fit with the tail pooled where expected counts drop below 5
    k_eff = max(1, min(kmax, int(math.floor(math.log2(K / 5.0)))))
    obs = np.append(counts[: k_eff], counts[k_eff:].sum())
    exp = K * np.append(2.0 ** -np.arange(1, k_eff + 1), 2.0**-k_eff)
    chi2_m, p_m = stats.chisquare(obs, exp)
    crit_m = stats.chi2.ppf(0.999, k_eff)
    rep.add("chi2_marginal", chi2_m, 0.0, crit_m)

    pairs = K // 2
    cap = max(1, min(kmax, int(math.floor(math.log2(pairs / 5.0) / 2))))
    chi2_i, dof_i, p_i = _independence_chi2(_pair_table(d, cap))
    crit_i = stats.chi2.ppf(0.999, dof_i) if dof_i else 0.0
    rep.add("chi2_pair_independence", chi2_i, 0.0, crit_i)
    rep.extra.update(
        {
            "p_marginal": float(p_m),
            "p_independence": float(p_i),
            "marginal_categories": k_eff + 1,
            "pair_cap": cap,
            "independence_dof": dof_i,
            "wide_tolerance": wide,
            "sigma_multiplier": z,
            "mean_digit": float(d.mean()),
        }
    )
    return rep


# ------------------------------------------------------- push-forward


def apply_T_dyadic_array(m: np.ndarray, bits: int) -> np.ndarray:
    """Numerators of T(m / 2^bits) over 2^bits, in exact int64 arithmetic (bits <= 40)."""
    if bits > 40:
        raise ValueError("resolution_bits must be <= 40")
    m = np.asarray(m, dtype=np.int64)
    _, blen = np.frexp(m.astype(np.float64))  # exact bit length for m < 2^53
    blen = blen.astype(np.int64)
    pow2 = m == (np.int64(1) << (blen - 1))
    d = bits - blen + 1 + pow2
    return (m << d) - (np.int64(1) << bits)


def pushforward_uniformity_test(
    seed: Optional[int] = None,
    K: int = 10**5,
    resolution_bits: int = 30,
    iterations: int = 1,
    stream: int = 0,
) -> ExperimentReport:
    """KS distance from uniform of T^iterations applied to K uniform dyadic points."""
    if resolution_bits > 40:
        raise ValueError("resolution_bits must be <= 40")
    seed = master_seed(seed)
    m = uniform_numerators(seed, stream, K, resolution_bits)
    m = m[m != (1 << resolution_bits)]  # x = 1 is fixed by T
    img = m
    for _ in range(iterations):
        img = apply_T_dyadic_array(img, resolution_bits)
    u = img.astype(np.float64) / float(1 << resolution_bits)
    ks = stats.kstest(u, "uniform")
    crit = special.kolmogi(0.001) / math.sqrt(u.size)
    rep = ExperimentReport(
        "pushforward",
        seed,
        {"K": K, "resolution_bits": resolution_bits, "iterations": iterations, "stream": stream},
    )
    rep.add("ks_distance", ks.statistic, 0.0, crit)
    src = stats.kstest(m.astype(np.float64) / float(1 << resolution_bits), "uniform")
    rep.extra.update(
        {
            "ks_pvalue": float(ks.pvalue),
            "sample_size": int(u.size),
            "excluded_fixed_points": int(K - m.size),
            "source_ks_distance": float(src.statistic),
            "critical_value": float(crit),
        }
    )
    return rep


# ------------------------------------------------------ Borel-Bernstein


def _bb_stream(seed: int, stream: int, phi: PhiSpec, N: int) -> Tuple[int, np.ndarray]:
    d = DigitStream(seed, stream).take(N)
    ev = d >= phi.thresholds(N)
    starts = [s - 1 for s, _ in window_edges(N)]
    hits = np.logical_or.reduceat(ev, starts)
    return int(ev.sum()), hits


def bb_experiment(
    phi: PhiSpec,
    K: int = 500,
    N: int = 10**5,
    seed: Optional[int] = None,
    window_tol: float = 0.05,
    workers: int = 1,
    tail_target: float = 0.1,
) -> ExperimentReport:
    """Event counts and per-window hit fractions of {d_n >= phi(n)} against exact oracles."""
    if K < 100:
        raise ValueError("K must be >= 100")
    if N < 3:
        raise ValueError("N must be >= 3")
    seed = master_seed(seed)
    res = _map_streams(_bb_stream, [(seed, i, phi, N) for i in range(K)], workers)
    counts = np.array([c for c, _ in res], dtype=float)
    hits = np.array([h for _, h in res], dtype=float)
    frac = hits.mean(axis=0)
    p = event_probabilities(phi, N)
    mean_oracle = math.fsum(p)
    var = math.fsum(p * (1 - p))
    oracle_w = window_hit_probabilities(phi, N)
    rep = ExperimentReport("borel-bernstein", seed, {"phi": str(phi), "K": K, "N": N})
    rep.add("mean_event_count", counts.mean(), mean_oracle, 5 * math.sqrt(var / K))
    edges = window_edges(N)
    rows = []
    for j, ((s, e), o, f) in enumerate(zip(edges, oracle_w, frac)):
        rep.add(f"window[{j}]", f, o, window_tol)
        rows.append({"j": j, "start": s, "end": e, "full": e == (1 << (j + 1)) - 1, "oracle": o, "empirical": f})
    rep.series["windows"] = rows
    full = [r["oracle"] for r in rows if r["full"]]
    monotone_from = len(full)
    while monotone_from > 0 and (monotone_from == len(full) or full[monotone_from - 1] >= full[monotone_from]):
        monotone_from -= 1
    converges = phi.series_converges()
    rep.extra.update(
        {
            "series_converges": converges,
            "expected_events_oracle": mean_oracle,
            "oracle_windows_nonincreasing_from": monotone_from,
            "last_window_oracle": float(oracle_w[-1]),
            "last_window_empirical": float(frac[-1]),
        }
    )
    if converges and min(phi.a, phi.b, phi.c) >= 0:
        tb = find_N0(phi, tail_target)
        rep.extra["N0"] = tb.N0
        rep.extra["tail_expectation_upper"] = tb.upper
    return rep


# ------------------------------------------------------------ max digit


def _max_stream(seed: int, stream: int, N: int) -> int:
    s = DigitStream(seed, stream)
    return int(max(int(b.max()) for b in s.blocks(N)))


QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)
Z_QUANTILE = 3.29  # two-sided 0.001 normal quantile


def max_digit_experiment(
    K: int = 1000,
    N: int = 10**6,
    seed: Optional[int] = None,
    workers: int = 1,
) -> ExperimentReport:
    """Law of L_N across K independent points against P(L_N <= m) = (1 - 2^-m)^N."""
    if K < 100:
        raise ValueError("K must be >= 100")
    if N < 10**4:
        raise ValueError("N must be >= 10^4")
    seed = master_seed(seed)
    L = np.array(_map_streams(_max_stream, [(seed, i, N) for i in range(K)], workers), dtype=np.int64)
    rep = ExperimentReport("max-digit", seed, {"K": K, "N": N})
    for q in QUANTILES:
        m = ln_quantile(N, q)
        F = ln_cdf(N, m)
        rep.add(f"cdf_at_q{q:g}", np.mean(L <= m), F, Z_QUANTILE * math.sqrt(F * (1 - F) / K))
    q25, q75 = ln_quantile(N, 0.25), ln_quantile(N, 0.75)
    med = float(np.median(L))
    rep.add("median_in_iqr", med, (q25 + q75) / 2, (q75 - q25) / 2)
    log2N = math.log2(N)
    ratio = L / log2N
    rep.add("mean_L_over_log2N", ratio.mean(), 1.05, 0.15)
    m_lo = math.floor(log2N)
    F_lo = ln_cdf(N, m_lo)
    rep.add("P(L_N<=floor(log2N))", np.mean(L <= m_lo), F_lo, 0.05)
    centred = (L - log2N) / math.log2(math.log(N))
    m_hi = math.ceil(log2N)
    rep.extra.update(
        {
            "oracle_quantiles": {str(q): ln_quantile(N, q) for q in QUANTILES},
            "empirical_quantiles": {str(q): float(np.quantile(L, q, method="inverted_cdf")) for q in QUANTILES},
            "oracle_mean_L": ln_expectation(N),
            "empirical_mean_L": float(L.mean()),
            "oracle_mean_L_over_log2N": ln_expectation(N) / log2N,
            "e_inverse_bracket": [F_lo, ln_cdf(N, m_hi)],
            "centred_mean": float(centred.mean()),
            "centred_quantiles": {str(q): float(np.quantile(centred, q)) for q in QUANTILES},
        }
    )
    dist = np.bincount(L)
    rep.series["L_N"] = [
        {"m": m, "count": int(dist[m]), "empirical_cdf": float(np.mean(L <= m)), "oracle_cdf": ln_cdf(N, m)}
        for m in range(int(L.min()), int(L.max()) + 1)
    ]
    return rep


# ------------------------------------------------------ shift invariance


def shift_invariance_check(
    seed: Optional[int] = None, K: int = 200, N: int = 5000, kmax: int = 8
) -> ExperimentReport:
    """Digit frequencies over positions [1, N] and [2, N+1] (the digits of x and of T x)."""
    seed = master_seed(seed)
    a = np.zeros(kmax + 1)
    b = np.zeros(kmax + 1)
    for i in range(K):
        d = np.minimum(DigitStream(seed, i).take(N + 1), kmax + 1)
        a += np.bincount(d[:N], minlength=kmax + 2)[1:]
        b += np.bincount(d[1:], minlength=kmax + 2)[1:]
    total = K * N
    rep = ExperimentReport("shift-invariance", seed, {"K": K, "N": N, "kmax": kmax})
    for k in range(1, kmax + 2):
        p = 2.0**-k if k <= kmax else 2.0**-kmax
        rep.add(f"freq[{k}]", b[k - 1] / total, a[k - 1] / total, 3 * math.sqrt(2 * p * (1 - p) / total))
    return rep
