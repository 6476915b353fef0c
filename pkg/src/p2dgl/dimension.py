"""Dimension numbers: s(alpha), s_M(alpha), the M-bonacci constants.

All roots are computed on strictly monotone closed forms by bisection down to
a 1e-6 bracket followed by safeguarded Newton steps, carried in mpmath at
``WORK_PREC`` bits.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

WORK_PREC = 96
RESIDUAL_TOL = 1e-12


class NoRootError(ValueError):
    """The defining equation has no root in the search interval."""

    def __init__(self, message: str, supremum: float):
        super().__init__(message)
        self.supremum = supremum


@dataclass(frozen=True)
class SolverResult:
    root: mpmath.mpf
    residual: float
    iterations: int
    bracket: Tuple[float, float]
    dimension: Optional[mpmath.mpf] = None

    def __float__(self) -> float:
        return float(self.root)

    def to_dict(self) -> dict:
        out = {
            "root": mpmath.nstr(self.root, 30),
            "residual": self.residual,
            "iterations": self.iterations,
            "bracket": list(self.bracket),
        }
        if self.dimension is not None:
            out["dimension"] = mpmath.nstr(self.dimension, 30)
        return out


def _solve_increasing(f: Callable, df: Callable, lo, hi) -> SolverResult:
    """Root of an increasing ``f`` with f(lo) < 0 <= f(hi)."""
    with mpmath.workprec(WORK_PREC):
        lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
        bracket = (float(lo), float(hi))
        if f(hi) == 0:
            return SolverResult(hi, 0.0, 0, bracket)
        it = 0
        while hi - lo > 1e-6:
            mid = (lo + hi) / 2
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
            it += 1
        x = (lo + hi) / 2
        eps = mpmath.mpf(2) ** (-(WORK_PREC - 8))
        for _ in range(100):
            it += 1
            fx = f(x)
            if fx == 0:
                break
            if fx < 0:
                lo = x
            else:
                hi = x
            step = fx / df(x)
            nx = x - step
            if not lo <= nx <= hi:
                nx = (lo + hi) / 2
            if abs(nx - x) <= eps * abs(x):
                x = nx
                break
            x = nx
        return SolverResult(+x, float(abs(f(x))), it, bracket)


def s_alpha_equation(s, alpha):
    """2^(s alpha) (2^s - 1) - 1; zero exactly at s = s(alpha)."""
    return mpmath.power(2, s * alpha) * (mpmath.power(2, s) - 1) - 1


def solve_s_alpha(alpha: float) -> SolverResult:
    """s(alpha): the root in (0, 1] of sum_k (2^-alpha 2^-k)^s = 1.

    The series sums to 1 / (2^(s alpha) (2^s - 1)), so the equation is
    2^(s alpha) (2^s - 1) = 1, increasing in s.
    """
    if not math.isfinite(alpha) or alpha < 0:
        raise ValueError("alpha must be finite and non-negative")
    with mpmath.workprec(WORK_PREC):
        a = mpmath.mpf(alpha)
        ln2 = mpmath.ln(2)

        def f(s):
            return s_alpha_equation(s, a)

        def df(s):
            e = mpmath.power(2, s * a)
            return ln2 * e * (a * (mpmath.power(2, s) - 1) + mpmath.power(2, s))

        return _solve_increasing(f, df, 0, 1)


def s_M_alpha_equation(s, M: int, alpha):
    """sum_{k=1}^M 2^-(alpha + k) s  -  1."""
    return mpmath.fsum(mpmath.power(2, -(alpha + k) * s) for k in range(1, M + 1)) - 1


def solve_s_M_alpha(M: int, alpha: float) -> SolverResult:
    """s_M(alpha): the root of sum_{k=1}^M (2^-alpha 2^-k)^s = 1.

    The finite sum equals M at s = 0 and decreases in s, so a positive root
    exists exactly when M >= 2.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if not math.isfinite(alpha) or alpha < 0:
        raise ValueError("alpha must be finite and non-negative")
    if M == 1:
        raise NoRootError(
            "sum has a single term 2^-(alpha+1)s < 1 for every s > 0; "
            "its supremum 1 is reached only at s = 0",
            supremum=1.0,
        )
    with mpmath.workprec(WORK_PREC):
        a = mpmath.mpf(alpha)
        ln2 = mpmath.ln(2)

        def f(s):
            return -s_M_alpha_equation(s, M, a)

        def df(s):
            return ln2 * mpmath.fsum((a + k) * mpmath.power(2, -(a + k) * s) for k in range(1, M + 1))

        res = _solve_increasing(f, df, 0, 1)
    return res


def mbonacci_polynomial(x, M: int):
    """x^M - x^(M-1) - ... - x - 1."""
    return mpmath.power(x, M) - mpmath.fsum(mpmath.power(x, i) for i in range(M))


def solve_mbonacci(M: int) -> SolverResult:
    """The M-bonacci constant s_M in (1, 2) with ``dimension = log2 s_M``."""
    if M < 2:
        raise ValueError("M must be >= 2")
    with mpmath.workprec(WORK_PREC):

        def f(x):
            return mbonacci_polynomial(x, M)

        def df(x):
            return M * mpmath.power(x, M - 1) - mpmath.fsum(i * mpmath.power(x, i - 1) for i in range(1, M))

        res = _solve_increasing(f, df, 1, 2)
        dim = mpmath.log(res.root, 2)
    return SolverResult(res.root, res.residual, res.iterations, res.bracket, dim)


# ---------------------------------------------------------------- curve


@dataclass(frozen=True)
class DimensionCurve:
    points: Tuple[Tuple[float, float], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "s_alpha"])
        for a, s in self.points:
            w.writerow([repr(a), repr(s)])
        return buf.getvalue()


def s_alpha_curve(grid: Sequence[float]) -> DimensionCurve:
    grid = [float(a) for a in grid]
    if any(a < 0 for a in grid):
        raise ValueError("grid must be non-negative")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    return DimensionCurve(tuple((a, float(solve_s_alpha(a).root)) for a in grid))


# ------------------------------------------------------------- counting


def composition_counts(j_max: int, M: int) -> List[int]:
    """N(0..j_max): words over {1..M} with digit sum j (M-bonacci recurrence)."""
    if M < 1 or j_max < 0:
        raise ValueError("need M >= 1 and j_max >= 0")
    n = [1] + [0] * j_max
    window = 1
    for j in range(1, j_max + 1):
        n[j] = window
        window += n[j]
        if j - M >= 0:
            window -= n[j - M]
    return n


def composition_count(j: int, M: int) -> int:
    return composition_counts(j, M)[j]


@dataclass(frozen=True)
class BoxDimensionEstimate:
    slope: float
    intercept: float
    rms_residual: float
    max_residual: float
    points_used: int
    j_range: Tuple[int, int]
    monotone: bool

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "rms_residual": self.rms_residual,
            "max_residual": self.max_residual,
            "points_used": self.points_used,
            "j_range": list(self.j_range),
            "monotone": self.monotone,
        }


def box_dimension_from_counts(counts: Iterable[Tuple[int, int]]) -> BoxDimensionEstimate:
    """Least-squares slope of log2 N(j) against j over the upper half of j.

    Cylinders of length 2^-j are the boxes, so the slope estimates the
    dimension.  Non-monotone count sequences are reported via ``monotone``.
    """
    pts = [(int(j), int(c)) for j, c in counts]
    if len(pts) < 10:
        raise ValueError("need at least 10 (j, N(j)) points")
    if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
        raise ValueError("j must be strictly increasing")
    monotone = all(b[1] >= a[1] for a, b in zip(pts, pts[1:]))
    j_lo = pts[0][0] + (pts[-1][0] - pts[0][0]) / 2
    top = [(j, c) for j, c in pts if j >= j_lo and c > 0]
    if len(top) < 2:
        raise ValueError("too few non-zero counts in the upper half")
    x = np.array([j for j, _ in top], dtype=float)
    y = np.array([math.log2(c) for _, c in top])
    slope, intercept = np.polyfit(x, y, 1)
    r = y - (slope * x + intercept)
    return BoxDimensionEstimate(
        float(slope),
        float(intercept),
        float(np.sqrt(np.mean(r**2))),
        float(np.max(np.abs(r))),
        len(top),
        (int(x[0]), int(x[-1])),
        monotone,
    )
