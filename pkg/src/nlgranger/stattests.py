"""One-sided tests on error-difference vectors, plus the classical F-test.

The sign test and the Wilcoxon signed-rank test both drop exact zeros
before testing: a zero carries no directional information, and dropping
it is what keeps the Binomial(n, 0.5) null well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.stats

WILCOXON_EXACT_LIMIT = 25  # exact tail enumeration up to this many nonzeros


class UndecidableTestError(ValueError):
    """Every element of the difference vector is exactly zero."""


@dataclass(frozen=True)
class TestOutcome:
    p_value: float
    statistic: float
    n_effective: int
    method: str

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")


def _drop_zeros(delta: np.ndarray) -> np.ndarray:
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 1:
        raise ValueError("delta must be a 1-D vector")
    nonzero = delta[delta != 0.0]
    if nonzero.size == 0:
        raise UndecidableTestError("all differences are exactly zero")
    return nonzero


def sign_test(delta: np.ndarray) -> TestOutcome:
    """Exact one-sided sign test for a positive median.

    With n nonzero differences of which n_plus are positive, the p-value is
    P[Binomial(n, 0.5) >= n_plus], accumulated in exact integer arithmetic,
    so there is no approximation error at any n.
    """
    nonzero = _drop_zeros(delta)
    n = nonzero.size
    n_plus = int(np.sum(nonzero > 0))
    # running-product tail: C(n, k+1) = C(n, k) * (n-k) / (k+1), all integers
    coefficient = math.comb(n, n_plus)
    tail = coefficient
    for k in range(n_plus, n):
        coefficient = coefficient * (n - k) // (k + 1)
        tail += coefficient
    p_value = tail / (1 << n)
    return TestOutcome(
        p_value=float(p_value), statistic=float(n_plus), n_effective=n, method="sign"
    )


def wilcoxon_signed_rank(delta: np.ndarray) -> TestOutcome:
    """One-sided Wilcoxon signed-rank test for a positive shift.

    Magnitudes get average ranks on ties; the statistic is the signed rank
    sum T. The tail probability of T under random sign flips is exact up to
    WILCOXON_EXACT_LIMIT nonzero samples and a continuity-corrected normal
    approximation beyond that.
    """
    nonzero = _drop_zeros(delta)
    n = nonzero.size
    ranks = scipy.stats.rankdata(np.abs(nonzero))
    signed_sum = float(np.sum(np.sign(nonzero) * ranks))

    # work on the positive-rank sum W = (T + sum(ranks)) / 2, doubled so
    # average ranks become integers
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    w2_observed = int(np.sum(doubled[nonzero > 0]))

    if n <= WILCOXON_EXACT_LIMIT:
        p_value = _exact_rank_sum_tail(doubled, w2_observed)
    else:
        p_value = _approx_rank_sum_tail(ranks, w2_observed / 2.0)

    return TestOutcome(
        p_value=p_value, statistic=signed_sum, n_effective=n, method="wilcoxon"
    )


def _exact_rank_sum_tail(doubled_ranks: np.ndarray, w2_observed: int) -> float:
    """P[W2 >= observed] where W2 sums a uniformly random subset of the ranks.

    Subset-sum counting is mathematically identical to enumerating all 2^n
    sign assignments; counts stay exact integers (<= 2^25) in int64.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        counts[r:] += counts[:-r].copy()
    tail = int(counts[w2_observed:].sum())
    return tail / (1 << len(doubled_ranks))


def _approx_rank_sum_tail(ranks: np.ndarray, w_observed: float) -> float:
    """Continuity-corrected normal tail for the positive-rank sum."""
    mean = float(np.sum(ranks)) / 2.0
    sd = math.sqrt(float(np.sum(ranks**2)) / 4.0)
    return float(scipy.stats.norm.sf((w_observed - 0.5 - mean) / sd))


def granger_f_test(
    rss_restricted: float,
    rss_unrestricted: float,
    lag_count: int,
    n_obs: int,
    df_denominator: int | None = None,
) -> TestOutcome:
    """Nested-model F-test on residual sums of squares.

    F = ((RSS_r - RSS_u) / L) / (RSS_u / df_den) with numerator df L and
    denominator df defaulting to the two-series case N - 2L - 1; pass
    ``df_denominator`` explicitly when more series enter the fit. A negative
    improvement clamps F to 0 (p = 1).
    """
    if rss_unrestricted <= 0:
        raise ValueError("unrestricted RSS must be positive")
    if lag_count < 1:
        raise ValueError("lag_count must be >= 1")
    df_den = n_obs - 2 * lag_count - 1 if df_denominator is None else df_denominator
    if df_den <= 0:
        raise ValueError(f"nonpositive denominator degrees of freedom ({df_den})")
    f_stat = ((rss_restricted - rss_unrestricted) / lag_count) / (
        rss_unrestricted / df_den
    )
    if f_stat < 0:
        f_stat = 0.0
    p_value = float(scipy.stats.f.sf(f_stat, lag_count, df_den))
    return TestOutcome(
        p_value=p_value,
        statistic=float(f_stat),
        n_effective=n_obs,
        method="f_test",
    )
