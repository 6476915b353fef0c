import json
import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from p2dgl.expansion import apply_T, expand
from p2dgl.rng import DigitStream, uniform_numerators
from p2dgl.stats import (
    PhiSpec,
    apply_T_dyadic_array,
    bb_event_indices,
    bb_experiment,
    digit_law_test,
    event_probabilities,
    expected_events,
    find_N0,
    gphi_subset_check,
    ln_cdf,
    ln_cdf_bruteforce,
    ln_cdf_exact,
    ln_expectation,
    ln_quantile,
    ln_trajectory,
    max_digit_experiment,
    pushforward_uniformity_test,
    shift_invariance_check,
    tail_expectation,
    window_edges,
    window_hit_probabilities,
)

LOG2N_T1 = PhiSpec.parse("log2n + log2log n")
LOG2N_T2 = PhiSpec.parse("log2n + 2log2log n")


class TestPhi:
    @pytest.mark.parametrize(
        "text,coefs",
        [
            ("log2n", (0, 1, 1, 0, 0)),
            ("2log2n", (0, 1, 2, 0, 0)),
            ("log2n + 2log2log n", (0, 1, 1, 2, 0)),
            ("log2(n)+2*log2(log(n))", (0, 1, 1, 2, 0)),
            ("0.5*n^0.5 + 3", (0.5, 0.5, 0, 0, 3)),
            ("n", (1, 1, 0, 0, 0)),
            ("n^1/2 - 1", (1, 0.5, 0, 0, -1)),
            ("7", (0, 1, 0, 0, 7)),
        ],
    )
    def test_parse(self, text, coefs):
        p = PhiSpec.parse(text)
        assert (p.a, p.r, p.b, p.c, p.c0) == pytest.approx(coefs)

    @pytest.mark.parametrize("bad", ["", "log3n", "n^2 + n^3", "sin n", "log2n +"])
    def test_parse_errors(self, bad):
        with pytest.raises(ValueError):
            PhiSpec.parse(bad)

    @given(
        st.floats(0, 3), st.sampled_from([0.25, 0.5, 1.0, 2.0]), st.floats(-2, 3), st.floats(-2, 3), st.floats(-5, 5)
    )
    def test_str_roundtrip(self, a, r, b, c, c0):
        p = PhiSpec(a, r, b, c, c0)
        q = PhiSpec.parse(str(p))
        n = np.arange(1, 200)
        assert np.allclose(q.values(199), p.values(199), rtol=1e-5, atol=1e-5)

    def test_vector_matches_scalar(self):
        p = PhiSpec(0.3, 0.7, 1.5, -0.5, 2.0)
        v = p.values(500)
        assert all(math.isclose(v[n - 1], p(n), rel_tol=1e-12) for n in range(1, 501))

    @pytest.mark.parametrize(
        "text,conv",
        [
            ("log2n", False),
            ("log2n + log2log n", False),
            ("log2n + 2log2log n", True),
            ("2log2n", True),
            ("0.9log2n", False),
            ("0.01*n^0.5", True),
            ("5", False),
        ],
    )
    def test_series_classification(self, text, conv):
        assert PhiSpec.parse(text).series_converges() is conv


class TestOracles:
    def test_event_probabilities(self):
        p = event_probabilities(PhiSpec.parse("log2n"), 9)
        # ceil(log2 n) = 0,1,2,2,3,3,3,3,4 -> max(1, .) -> 2^(1-m)
        assert p.tolist() == [1, 1, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 0.125]

    def test_window_oracle_matches_exact_product(self):
        phi = LOG2N_T1
        N = 300
        probs = window_hit_probabilities(phi, N)
        for (s, e), got in zip(window_edges(N), probs):
            miss = Fraction(1)
            for n in range(s, e + 1):
                m = max(1, math.ceil(phi(n)))
                miss *= 1 - Fraction(1, 2 ** (m - 1))
            assert got == pytest.approx(float(1 - miss), abs=1e-15)

    def test_window_edges(self):
        assert window_edges(10) == [(1, 1), (2, 3), (4, 7), (8, 10)]

    def test_expected_events_two_log2n(self):
        # finite sum oracle, compared with the series limit pi^2/3 only loosely
        phi = PhiSpec.parse("2log2n")
        direct = math.fsum(2.0 ** (1 - max(1, math.ceil(2 * math.log2(n)))) for n in range(1, 10**5 + 1))
        assert expected_events(phi, 10**5) == pytest.approx(direct, rel=1e-13)
        assert 2.0 < direct < math.pi**2 / 3

    def test_tail_sum_against_direct_summation(self):
        phi = PhiSpec.parse("3log2n")
        tb = tail_expectation(phi, 10)
        direct = math.fsum(2.0 ** (1 - math.ceil(3 * math.log2(n))) for n in range(11, 200_000))
        assert tb.upper >= direct
        assert tb.upper - direct < 2 * 2 / 199_999**2 + 1e-12

    def test_find_N0_convergent(self):
        tb = find_N0(LOG2N_T2, 0.1)
        assert tb.upper < 0.1
        assert tail_expectation(LOG2N_T2, tb.N0 - 1).upper >= 0.1
        assert tb.N0 == 2086360

    def test_find_N0_divergent_raises(self):
        with pytest.raises(ValueError):
            find_N0(LOG2N_T1)

    def test_tail_rejects_negative_coefficients(self):
        with pytest.raises(ValueError):
            tail_expectation(PhiSpec(b=2.0, c=-1.0), 10)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_ln_cdf_bruteforce(self, n):
        for m in range(1, 7):
            exact, flt = ln_cdf_exact(n, m)
            assert exact == ln_cdf_bruteforce(n, m)
            assert flt == pytest.approx(float(exact), rel=1e-14)

    def test_ln_cdf_examples(self):
        assert ln_cdf_exact(3, 2)[0] == Fraction(27, 64)
        assert ln_cdf_exact(1, 1)[0] == Fraction(1, 2)
        with pytest.raises(ValueError):
            ln_cdf_exact(0, 1)

    @given(st.integers(1, 10**7), st.integers(1, 60))
    def test_ln_cdf_monotone_in_m(self, n, m):
        assert ln_cdf(n, m) <= ln_cdf(n, m + 1) <= 1

    def test_quantile_and_expectation(self):
        N = 10**6
        for q in (0.1, 0.5, 0.9):
            m = ln_quantile(N, q)
            assert ln_cdf(N, m) >= q > ln_cdf(N, m - 1)
        direct = sum(1 - ln_cdf(N, m) for m in range(0, 200))
        assert ln_expectation(N) == pytest.approx(direct, rel=1e-12)


class TestStreams:
    def test_constant_phi_hits_everything(self):
        s = DigitStream(1)
        assert bb_event_indices(s, PhiSpec.constant(1), 1000).tolist() == list(range(1, 1001))
        assert bb_event_indices(s, PhiSpec.constant(1e6), 1000).size == 0
        with pytest.raises(ValueError):
            bb_event_indices(s, PhiSpec.constant(1), 2)

    def test_log2n_single_stream_count(self):
        phi = PhiSpec.parse("log2n")
        N = 10**5
        oracle = expected_events(phi, N)
        got = bb_event_indices(DigitStream(31337), phi, N).size
        assert abs(got - oracle) <= 5 * math.sqrt(oracle)

    def test_trajectory(self):
        assert ln_trajectory([1, 3, 1, 1]).tolist() == [1, 3, 3, 3]
        per = expand("1/5", 50)
        assert set(ln_trajectory(per).tolist()) == {3}
        with pytest.raises(ValueError):
            ln_trajectory([])

    @given(st.lists(st.integers(1, 30), min_size=1, max_size=200))
    def test_trajectory_non_decreasing(self, d):
        L = ln_trajectory(d)
        assert np.all(np.diff(L) >= 0) and L[-1] == max(d)

    def test_gphi_log2n(self):
        r = gphi_subset_check(DigitStream(8), PhiSpec.parse("log2n"), 10**5)
        assert r.ok and r.indices.size > 0
        d = DigitStream(8).take(10**5)
        assert np.all(r.witnesses <= r.indices)

    def test_gphi_constant_phi_flagged(self):
        r = gphi_subset_check([1, 2, 3, 1, 1], PhiSpec.constant(2))
        assert not r.precondition_ok and not r.ok

    def test_gphi_single_large_digit(self):
        d = [1] * 40
        d[4] = 30
        d[30] = 31
        r = gphi_subset_check(d, PhiSpec.parse("log2n"))
        w = dict(zip(r.indices.tolist(), r.witnesses.tolist()))
        assert all(w[n] == 5 for n in range(5, 31))
        assert w[31] == 31

    def test_gphi_rejects_non_monotone(self):
        with pytest.raises(ValueError):
            gphi_subset_check([1] * 10, PhiSpec(b=-1.0, c0=5))


class TestDigitLaw:
    def test_minimum_sample_size(self):
        with pytest.raises(ValueError):
            digit_law_test(1, K=9999)

    def test_small_sample_flag(self):
        r = digit_law_test(1, K=10**4)
        assert r.extra["wide_tolerance"] is True
        assert digit_law_test(1, K=10**5).extra["wide_tolerance"] is False

    def test_all_ones_stream(self):
        r = digit_law_test(K=10**5, digits=np.ones(10**5, dtype=np.int64))
        assert r.extra["p_marginal"] < 1e-100
        assert r.extra["p_independence"] == 1.0
        assert "chi2_marginal" in r.failures()
        assert "chi2_pair_independence" not in r.failures()

    def test_pvalues_reported(self):
        r = digit_law_test(5, K=10**5)
        assert 0 <= r.extra["p_marginal"] <= 1 and 0 <= r.extra["p_independence"] <= 1

    def test_dependent_pairs_detected(self):
        d = DigitStream(3).take(10**5)
        d[1::2] = d[0::2]  # second of each pair copies the first
        r = digit_law_test(K=10**5, digits=d)
        assert r.extra["p_independence"] < 1e-10


class TestPushforward:
    @given(st.integers(1, 40).flatmap(lambda b: st.tuples(st.lists(st.integers(1, 2**b), min_size=1, max_size=50), st.just(b))))
    def test_vector_T_matches_exact(self, mb):
        m, b = mb
        got = apply_T_dyadic_array(np.array(m), b)
        for mi, gi in zip(m, got):
            assert Fraction(int(gi), 2**b) == apply_T(Fraction(mi, 2**b))

    def test_fixed_point_excluded(self):
        assert apply_T_dyadic_array(np.array([1 << 20]), 20).tolist() == [1 << 20]
        r = pushforward_uniformity_test(4, K=10**4, resolution_bits=3)
        assert r.extra["excluded_fixed_points"] > 0

    def test_resolution_limit(self):
        with pytest.raises(ValueError):
            pushforward_uniformity_test(1, K=100, resolution_bits=41)

    @pytest.mark.parametrize("iterations", [1, 2])
    def test_uniform_image(self, iterations):
        r = pushforward_uniformity_test(11, K=10**5, resolution_bits=30, iterations=iterations)
        assert r.verdict
        assert r.tolerance[0] == pytest.approx(1.9495 / math.sqrt(r.extra["sample_size"]), rel=1e-3)

    def test_non_invariant_map_is_rejected(self):
        # sanity of the test itself: x -> x^2 is not measure preserving
        m = uniform_numerators(1, 0, 10**5, 30).astype(float) / 2**30
        from scipy import stats

        assert stats.kstest(m**2, "uniform").pvalue < 1e-10


class TestExperiments:
    def test_bb_constant_one(self):
        r = bb_experiment(PhiSpec.constant(1), K=100, N=64, seed=1)
        assert r.verdict
        assert all(w["oracle"] == 1.0 and w["empirical"] == 1.0 for w in r.series["windows"])

    def test_bb_reproducible_and_worker_independent(self):
        a = bb_experiment(LOG2N_T2, K=120, N=3000, seed=9, workers=1)
        b = bb_experiment(LOG2N_T2, K=120, N=3000, seed=9, workers=2)
        assert a.to_json() == b.to_json()
        assert a.to_json() == bb_experiment(LOG2N_T2, K=120, N=3000, seed=9).to_json()

    def test_bb_convergent_reports_N0_and_monotone_index(self):
        r = bb_experiment(LOG2N_T2, K=100, N=5000, seed=2)
        assert r.extra["N0"] == 2086360
        full = [w["oracle"] for w in r.series["windows"] if w["full"]]
        i = r.extra["oracle_windows_nonincreasing_from"]
        assert all(b <= a for a, b in zip(full[i:], full[i + 1 :]))
        assert json.loads(r.to_json())["verdict"] in ("pass", "fail")

    def test_bb_precondition(self):
        with pytest.raises(ValueError):
            bb_experiment(LOG2N_T1, K=99, N=100)

    def test_max_digit_small(self):
        a = max_digit_experiment(K=100, N=10**4, seed=3)
        b = max_digit_experiment(K=100, N=10**4, seed=3, workers=2)
        assert a.to_json() == b.to_json()
        with pytest.raises(ValueError):
            max_digit_experiment(K=100, N=9999)

    def test_shift_invariance(self):
        r = shift_invariance_check(seed=21, K=100, N=4000)
        assert r.verdict
