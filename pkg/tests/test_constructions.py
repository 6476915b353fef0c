import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from p2dgl.constructions import (
    BudgetExceeded,
    ConstructionSpec,
    MassDistribution,
    construct_E_point,
    construct_F_point,
    count_cylinders_by_length,
    cylinder_dump_csv,
    enumerable_ranks,
    enumerate_words,
    fundamental_interval,
    fundamental_length,
    gaps_at_rank,
    generate_nk,
    check_measure,
    holder_check,
    limsup_point_check,
    mu_measure,
)
from p2dgl.dimension import composition_counts, solve_s_M_alpha
from p2dgl.expansion import cylinder

F21 = ConstructionSpec.F(2, 1.0)


def naive_nk(alpha, K):
    out = []
    for k in range(1, K + 1):
        n = 1
        while not (n > (k + 1) * sum(out) and math.floor(alpha * (1 + 1 / k) * n) - math.floor(alpha * n) > 1):
            n += 1
        out.append(n)
    return out


class TestSequence:
    def test_alpha_one(self):
        assert generate_nk(1.0, 6) == (2, 7, 37, 231, 1663, 13581)
        assert list(generate_nk(1.0, 5)) == naive_nk(1.0, 5)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.7, 3.0])
    def test_invariants(self, alpha):
        nk = generate_nk(alpha, 5)
        assert list(nk) == naive_nk(alpha, 5)
        for k, n in enumerate(nk, start=1):
            assert math.floor(alpha * (1 + 1 / k) * n) - math.floor(alpha * n) > 1
            assert (k + 1) * sum(nk[: k - 1]) < n

    def test_small_candidates_rejected(self):
        # floor((1 + 1/k) n) - n <= 1 whenever n/k < 2
        for k in range(1, 6):
            for n in range(1, 2 * k):
                assert math.floor((1 + 1 / k) * n) - n <= 1

    def test_position_filter(self):
        nk = generate_nk(1.0, 4, allowed=lambda n: n % 10 == 3)
        assert all(n % 10 == 3 for n in nk[1:])

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            generate_nk(0, 3)


class TestSpec:
    def test_ranges(self):
        assert [F21.special_range(k) for k in range(1, 4)] == [(3, 4), (8, 10), (38, 49)]
        assert F21.digit_range(1) == (1, 2) and F21.digit_range(2) == (3, 4)

    def test_roundtrip_text(self):
        for spec in (F21, ConstructionSpec.E(3, 0.5, 1.0, 4)):
            assert ConstructionSpec.loads(spec.dumps()) == spec

    def test_loads_generates_nk(self):
        s = ConstructionSpec.loads("# test\nflavor=F\nM=2\nalpha=1\nK=4\n")
        assert s.nk == (2, 7, 37, 231)

    def test_E_requirements(self):
        with pytest.raises(ValueError):
            ConstructionSpec.E(2, 0.9, 1.0, 5)
        e = ConstructionSpec.E(2, 0.5, 1.0, 4, horizon=10**4)
        assert e.nk == (1, 16, 81, 256, 625, 1296, 2401, 4096, 6561, 10000)

    def test_horizon(self):
        with pytest.raises(ValueError):
            F21.digit_range(F21.horizon + 1)


class TestEnumeration:
    def test_free_prefix(self):
        spec = ConstructionSpec.F(3, 0.5)
        n1 = spec.nk[0]
        assert len(list(enumerate_words(spec, n1 - 1))) == 3 ** (n1 - 1)

    def test_multiplies_by_range_width_at_n1(self):
        n1 = F21.nk[0]
        lo, hi = F21.special_range(1)
        assert F21.count_words(n1) == F21.count_words(n1 - 1) * (math.floor(2 * n1) - math.floor(n1))
        assert len(list(enumerate_words(F21, n1))) == F21.count_words(n1)

    def test_E_forced_position_keeps_count(self):
        e = ConstructionSpec.E(2, 0.5, 1.0, 4)
        assert e.count_words(16) == e.count_words(15)

    def test_lexicographic_and_valid(self):
        ws = list(enumerate_words(F21, 8))
        assert ws == sorted(ws) and len(set(ws)) == len(ws) == F21.count_words(8)
        assert all(F21.contains(w) for w in ws)

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            list(enumerate_words(F21, 10, budget=100))


class TestFundamentalIntervals:
    @pytest.mark.parametrize("n", range(1, 9))
    def test_union_of_children(self, n):
        for w in enumerate_words(F21, n):
            J = fundamental_interval(F21, w)
            lo, hi = F21.digit_range(n + 1)
            kids = [cylinder(w + (c,)) for c in range(lo, hi + 1)]
            assert J.left == min(c.left for c in kids) and J.right == max(c.right for c in kids)
            assert J.length == sum(c.length for c in kids) == fundamental_length(F21, w)

    def test_length_cases(self):
        w = (1, 3)  # n + 1 = 3 is free
        assert fundamental_length(F21, w) == Fraction(3, 4) * Fraction(1, 2**4)
        w = (2,)  # n + 1 = 2 = n_1, range [3, 4]
        assert fundamental_length(F21, w) == Fraction(1, 2**2) * (Fraction(1, 2**2) - Fraction(1, 2**4))

    def test_rejects_invalid_word(self):
        with pytest.raises(ValueError):
            fundamental_interval(F21, (1, 1))

    @given(st.integers(1, 11))
    def test_siblings_disjoint_and_inside_parent(self, n):
        ws = list(enumerate_words(F21, n))[:200]
        for w in ws:
            J = fundamental_interval(F21, w)
            parent = cylinder(w)
            assert parent.left < J.left and J.right <= parent.right


def brute_gaps(spec, n):
    Js = sorted((fundamental_interval(spec, w) for w in enumerate_words(spec, n)), key=lambda J: J.left)
    out = {}
    for i, J in enumerate(Js):
        g = []
        if i:
            g.append(J.left - Js[i - 1].right)
        if i + 1 < len(Js):
            g.append(Js[i + 1].left - J.right)
        out[J.word] = min(g)
    return out


class TestGaps:
    @pytest.mark.parametrize("n", range(1, 10))
    def test_matches_brute_force(self, n):
        rep = gaps_at_rank(F21, n)
        g = brute_gaps(F21, n)
        assert rep.min_gap == min(g.values())
        assert rep.ok
        k = F21.special_index(n + 1)
        for w, gap in g.items():
            S = sum(w)
            bound = Fraction(1, 2 ** (S + (F21.special_range(k)[1] if k else F21.M)))
            assert gap >= bound

    def test_bound_kinds(self):
        assert gaps_at_rank(F21, 1).bound.startswith("G4")
        assert gaps_at_rank(F21, 2).bound.startswith("G3")

    def test_M3_spec(self):
        spec = ConstructionSpec.F(3, 0.5)
        for n in range(1, 9):
            assert gaps_at_rank(spec, n).ok

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            gaps_at_rank(F21, 12, budget=1000)


def direct_mu(spec, word, s):
    # product of 1/width over special positions and (2^-alpha 2^-d)^s over free ones
    v = mpmath.mpf(1)
    for i, d in enumerate(word, start=1):
        k = spec.special_index(i)
        if k:
            lo, hi = spec.special_range(k)
            v /= hi - lo + 1
        else:
            v *= mpmath.power(2, -(spec.alpha + d) * s)
    return v


class TestMeasure:
    def test_matches_direct_product(self):
        s = solve_s_M_alpha(2, 1.0).root
        mu = MassDistribution(F21)
        with mpmath.workprec(96):
            for n in (1, 2, 5, 9):
                for w in list(enumerate_words(F21, n))[:50]:
                    assert abs(mu(w).value - direct_mu(F21, w, s)) < mpmath.mpf(2) ** -80

    def test_rank1_total_and_additivity(self):
        mu = MassDistribution(F21)
        with mpmath.workprec(96):
            assert abs(mpmath.fsum(mu((d,)).value for d in (1, 2)) - 1) < 1e-20
            for n in range(1, 10):
                for w in enumerate_words(F21, n):
                    kids = mpmath.fsum(m.value for _, m in mu.children(w))
                    assert abs(kids - mu(w).value) < 1e-20 * mu(w).value

    def test_special_position_divides_evenly(self):
        mu = MassDistribution(F21)
        with mpmath.workprec(96):
            parent = mu((2,)).value
            for c in (3, 4):
                assert abs(mu((2, c)).value - parent / 2) < 1e-25

    def test_check_measure(self):
        m = check_measure(F21, budget=5000)
        assert m.ok
        assert m.ranks == enumerable_ranks(F21, 5000)

    def test_rejects_E(self):
        with pytest.raises(ValueError):
            mu_measure(ConstructionSpec.E(2, 0.5, 1.0, 4), (1,))

    def test_log_space_depth(self):
        w = tuple(construct_F_point(F21, 300))
        v = mu_measure(F21, w)
        assert v.log2 < -200 and v.free_count == 300 - 4


class TestHolder:
    def test_bounded_at_positive_epsilon(self):
        h = holder_check(F21, ranks=range(1, 12), epsilon=0.1)
        assert h.verdict and not h.expected_failure_mode

    def test_zero_epsilon_flag(self):
        h = holder_check(F21, ranks=range(1, 8), epsilon=0)
        assert h.expected_failure_mode

    def test_single_rank_one(self):
        h = holder_check(F21, ranks=[1], epsilon=0.1)
        s = solve_s_M_alpha(2, 1.0).root
        with mpmath.workprec(96):
            want = max(
                direct_mu(F21, (d,), s) / (mpmath.mpf(fundamental_length(F21, (d,)).numerator) / fundamental_length(F21, (d,)).denominator) ** (mpmath.mpf(9) / 10 * s) for d in (1, 2)
            )
            assert h.log2_cstar[0] == pytest.approx(float(mpmath.log(want, 2)), abs=1e-12)


def brute_counts(spec, j_max, M=None):
    counts = [0] * (j_max + 1)

    def rec(pos, s):
        counts[s] += 1
        lo, hi = (1, M) if spec is None else spec.digit_range(pos + 1)
        for d in range(lo, hi + 1):
            if s + d <= j_max:
                rec(pos + 1, s + d)

    rec(0, 0)
    return counts


class TestBoxCounts:
    def test_plain_matches_composition_counts(self):
        for M in (2, 3):
            assert [c for _, c in count_cylinders_by_length(None, 60, M=M)] == composition_counts(60, M)

    @pytest.mark.parametrize("spec", [F21, ConstructionSpec.F(3, 0.5), ConstructionSpec.E(2, 0.5, 1.0, 4)])
    def test_dp_matches_enumeration(self, spec):
        assert [c for _, c in count_cylinders_by_length(spec, 20)] == brute_counts(spec, 20)

    def test_unreachable_sums_are_zero(self):
        spec = ConstructionSpec.F(2, 3.0)
        counts = dict(count_cylinders_by_length(spec, 30))
        # the second digit is forced to at least floor(3 n_1) + 1
        lo = spec.special_range(1)[0]
        n1 = spec.nk[0]
        assert all(counts[j] == brute_counts(spec, 30)[j] for j in counts)
        assert counts[0] == 1

    def test_limit(self):
        with pytest.raises(ValueError):
            count_cylinders_by_length(None, 4001, M=2)


class TestPoints:
    def test_E_point_sandwich(self):
        rep = construct_E_point(0.5, 1.0, 2, 4, 10**6)
        a, b = rep.last_special**4, (rep.last_special + 1) ** 4
        assert rep.deviation <= (b**0.5 - a**0.5) / a**0.5
        assert rep.ok

    def test_E_point_running_max_constant_between_specials(self):
        rep = construct_E_point(0.5, 1.0, 2, 4, 20000)
        L = np.maximum.accumulate(rep.word)
        for k in range(rep.k0, 11):
            seg = L[k**4 - 1 : (k + 1) ** 4 - 1]
            assert np.all(seg == math.floor(k**2))

    def test_E_precondition(self):
        with pytest.raises(ValueError):
            construct_E_point(0.9, 1.0, 2, 5, 1000)

    def test_limsup(self):
        rep = limsup_point_check(F21, 2000)
        assert rep.ok
        assert rep.ratios[2] > 1 and rep.ratios[2] <= 4 / 3
        assert all(a > b for a, b in zip(rep.ratios, rep.ratios[1:]))
        assert rep.free_ratio_max <= 2 / F21.nk[0]

    def test_limsup_min_choice(self):
        assert limsup_point_check(F21, 2000, choice="min").ok

    def test_F_point_in_spec(self):
        w = construct_F_point(F21, 500)
        assert F21.contains(tuple(int(d) for d in w))


def test_cylinder_dump():
    text = cylinder_dump_csv(F21, 3)
    rows = text.strip().split("\n")
    assert rows[0] == "word,left,right,length,mu"
    assert len(rows) == 1 + F21.count_words(3)
    assert math.fsum(float(r.split(",")[4]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-12)
