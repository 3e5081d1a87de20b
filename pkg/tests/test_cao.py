"""Embedding-dimension selection on signals with known structure."""

import numpy as np
import pytest

from nlgranger.cao import minimum_embedding_dimension, select_lag_cao
from nlgranger.panel import TimeSeriesPanel


def ar2_oscillator(n, x0=2.0, x1=1.5, noise=None):
    x = np.zeros(n)
    x[0], x[1] = x0, x1
    for t in range(2, n):
        x[t] = 0.95 * np.sqrt(2) * x[t - 1] - 0.9025 * x[t - 2]
        if noise is not None:
            x[t] += noise[t]
    return x


class TestMinimumEmbeddingDimension:
    def test_noise_free_oscillator_plateaus_low(self):
        # Two-dimensional deterministic state: E1 jumps by d=2 (E1(2) ~ 0.9,
        # just outside the plateau tolerance) and settles inside it at d=3.
        result = minimum_embedding_dimension(ar2_oscillator(300))
        assert result.dimension == 3
        assert abs(result.e1[2] - 1.0) < 0.05
        assert result.e1[0] < 0.1

    def test_plateau_is_permanent_for_deterministic_signal(self):
        result = minimum_embedding_dimension(ar2_oscillator(300))
        assert np.all(np.abs(result.e1[result.dimension :] - 1.0) < 0.06)

    def test_noise_dominated_series_hits_dmax(self):
        # Stochastic signals never quite plateau: E1 creeps toward 1 from
        # below, so the clamp at d_max is the selected value.
        rng = np.random.default_rng(0)
        series = 1.0 + 1e-9 * rng.normal(size=1000)
        result = minimum_embedding_dimension(series, d_max=10)
        assert result.dimension == 10
        assert np.all(np.diff(result.e1) > -0.05)  # monotone creep upward

    def test_exactly_constant_series_is_one_dimensional(self):
        result = minimum_embedding_dimension(np.full(100, 2.5))
        assert result.dimension == 1

    def test_output_always_within_bounds(self):
        rng = np.random.default_rng(1)
        for d_max in (2, 4, 7):
            for _ in range(3):
                series = rng.normal(size=200)
                result = minimum_embedding_dimension(series, d_max=d_max)
                assert 1 <= result.dimension <= d_max

    def test_too_short_series(self):
        with pytest.raises(ValueError, match="too short"):
            minimum_embedding_dimension(np.arange(8.0), d_max=10)

    def test_e2_reported_alongside(self):
        result = minimum_embedding_dimension(ar2_oscillator(300))
        assert result.e2.shape == result.e1.shape


class TestSelectLag:
    def test_max_over_series(self):
        rng = np.random.default_rng(2)
        deterministic = ar2_oscillator(400)
        noisy = rng.normal(size=400)
        panel = TimeSeriesPanel(
            values=np.column_stack([deterministic, noisy]), names=("det", "noise")
        )
        lag = select_lag_cao(panel, d_max=6)
        per_series = [
            minimum_embedding_dimension(panel.values[:, j], d_max=6).dimension
            for j in range(2)
        ]
        assert lag == max(per_series)

    def test_clamped_to_d_max(self):
        rng = np.random.default_rng(3)
        panel = TimeSeriesPanel(values=rng.normal(size=(300, 2)), names=("a", "b"))
        assert select_lag_cao(panel, d_max=3) <= 3
