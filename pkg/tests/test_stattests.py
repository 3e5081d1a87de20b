"""Exact nonparametric tests validated against brute-force enumeration."""

import numpy as np
import pytest
import scipy.stats

from nlgranger.stattests import (
    UndecidableTestError,
    _approx_rank_sum_tail,
    granger_f_test,
    sign_test,
    wilcoxon_signed_rank,
)


def popcount_sign_oracle(delta):
    """P[n_plus >= observed] by enumerating every sign pattern explicitly."""
    nonzero = delta[delta != 0]
    n = nonzero.size
    observed = int(np.sum(nonzero > 0))
    patterns = np.arange(1 << n, dtype=np.uint64)
    # vectorized popcount
    counts = np.zeros(patterns.size, dtype=np.int64)
    v = patterns.copy()
    while v.any():
        counts += (v & 1).astype(np.int64)
        v >>= 1
    return float(np.mean(counts >= observed))


def wilcoxon_enumeration_oracle(delta):
    """Tail of T over all 2^n sign assignments of the observed magnitudes."""
    nonzero = delta[delta != 0]
    ranks = scipy.stats.rankdata(np.abs(nonzero))
    observed = float(np.sum(np.sign(nonzero) * ranks))
    n = nonzero.size
    hits = 0
    for pattern in range(1 << n):
        signs = np.array([1.0 if pattern >> i & 1 else -1.0 for i in range(n)])
        if float(np.sum(signs * ranks)) >= observed - 1e-12:
            hits += 1
    return hits / (1 << n)


class TestSignTest:
    def test_all_positive_five(self):
        out = sign_test(np.array([1.0, 1, 1, 1, 1]))
        assert out.p_value == 1 / 32
        assert out.statistic == 5
        assert out.n_effective == 5

    def test_three_of_four_positive(self):
        out = sign_test(np.array([1.0, 1, 1, -1]))
        assert out.p_value == 5 / 16

    def test_all_zero_is_undecidable(self):
        with pytest.raises(UndecidableTestError):
            sign_test(np.zeros(3))

    def test_zeros_dropped_from_count(self):
        out = sign_test(np.array([1.0, 0, 1, 0, 1, 0, 1, 1]))
        assert out.n_effective == 5
        assert out.p_value == 1 / 32

    def test_matches_enumeration_for_all_small_n(self):
        rng = np.random.default_rng(0)
        for n in range(1, 21):
            delta = rng.normal(size=n)
            got = sign_test(delta).p_value
            want = popcount_sign_oracle(delta)
            assert got == pytest.approx(want, abs=1e-12)

    def test_p_nonincreasing_in_positive_count(self):
        n = 15
        previous = 1.1
        for n_plus in range(n + 1):
            delta = np.array([1.0] * n_plus + [-1.0] * (n - n_plus))
            p = sign_test(delta).p_value
            assert p <= previous + 1e-15
            previous = p

    def test_null_pvalues_uniform_at_atoms(self):
        # With a discrete null the CDF equals the diagonal exactly at the
        # atoms; between atoms the gap is test discreteness, not bias.
        rng = np.random.default_rng(1)
        pvals = np.array([sign_test(rng.normal(size=100)).p_value for _ in range(2000)])
        atoms = np.unique(pvals)
        gaps = [abs(np.mean(pvals <= a) - a) for a in atoms]
        assert max(gaps) < 0.05


class TestWilcoxon:
    def test_three_positive(self):
        out = wilcoxon_signed_rank(np.array([1.0, 2.0, 3.0]))
        assert out.statistic == 6
        assert out.p_value == 1 / 8

    def test_mixed_pair(self):
        out = wilcoxon_signed_rank(np.array([-1.0, 2.0]))
        assert out.statistic == 1
        assert out.p_value == 0.5

    def test_single_negative(self):
        out = wilcoxon_signed_rank(np.array([-5.0]))
        assert out.statistic == -1
        assert out.p_value == 1.0

    def test_all_zero_is_undecidable(self):
        with pytest.raises(UndecidableTestError):
            wilcoxon_signed_rank(np.zeros(4))

    def test_matches_enumeration_small_n(self):
        rng = np.random.default_rng(2)
        for n in range(1, 13):
            delta = rng.normal(size=n)
            got = wilcoxon_signed_rank(delta).p_value
            want = wilcoxon_enumeration_oracle(delta)
            assert got == pytest.approx(want, abs=1e-12)

    def test_exact_branch_handles_ties(self):
        delta = np.array([1.0, -1.0, 2.0, 2.0, -3.0])
        got = wilcoxon_signed_rank(delta).p_value
        want = wilcoxon_enumeration_oracle(delta)
        assert got == pytest.approx(want, abs=1e-12)

    def test_normal_approximation_close_at_cutover(self):
        rng = np.random.default_rng(3)
        for n in range(20, 26):
            delta = rng.normal(loc=0.3, size=n)
            nonzero = delta[delta != 0]
            ranks = scipy.stats.rankdata(np.abs(nonzero))
            w_observed = float(np.sum(ranks[nonzero > 0]))
            approx = _approx_rank_sum_tail(ranks, w_observed)
            exact = wilcoxon_signed_rank(delta).p_value  # exact branch at n <= 25
            assert approx == pytest.approx(exact, abs=0.01)

    def test_large_n_uses_approximation(self):
        rng = np.random.default_rng(4)
        delta = rng.normal(loc=0.5, size=60)
        out = wilcoxon_signed_rank(delta)
        assert 0.0 <= out.p_value <= 1.0
        assert out.n_effective == 60


class TestGrangerFTest:
    def test_no_improvement_gives_p_one(self):
        out = granger_f_test(1.5, 1.5, lag_count=2, n_obs=30)
        assert out.statistic == 0.0
        assert out.p_value == 1.0

    def test_worked_example(self):
        out = granger_f_test(2.0, 1.0, lag_count=1, n_obs=12)
        assert out.statistic == pytest.approx(9.0, abs=1e-12)
        # F(1, 9) upper tail at 9 equals the two-sided t(9) tail at 3
        want = 2 * scipy.stats.t.sf(3.0, 9)
        assert out.p_value == pytest.approx(want, rel=1e-10)
        assert out.p_value == pytest.approx(0.0150, abs=5e-4)

    def test_negative_improvement_clamps(self):
        out = granger_f_test(0.5, 1.0, lag_count=1, n_obs=20)
        assert out.statistic == 0.0
        assert out.p_value == 1.0

    def test_degenerate_dof(self):
        with pytest.raises(ValueError, match="degrees of freedom"):
            granger_f_test(2.0, 1.0, lag_count=1, n_obs=3)
        # N = 4, L = 1 leaves one denominator dof and must work
        assert granger_f_test(2.0, 1.0, lag_count=1, n_obs=4).p_value > 0

    def test_custom_denominator_dof(self):
        out = granger_f_test(2.0, 1.0, lag_count=1, n_obs=12, df_denominator=8)
        assert out.statistic == pytest.approx(8.0)

    def test_rss_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            granger_f_test(1.0, 0.0, lag_count=1, n_obs=12)
