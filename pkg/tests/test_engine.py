"""Directed tests and all-pairs recovery: detection, nulls, determinism."""

import numpy as np
import pytest
import scipy.stats

from nlgranger.engine import GcConfig, gc_network, gc_test, gc_test_linear
from nlgranger.panel import TimeSeriesPanel
from nlgranger.simnet import NetworkSpec, generate


def coupled_pair(n=1000, seed=7, coupling=0.9):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=n)
    noise = rng.normal(size=n)
    y = np.zeros(n)
    for t in range(1, n):
        y[t] = coupling * q[t - 1] + 0.1 * noise[t]
    return TimeSeriesPanel(values=np.column_stack([q, y]), names=("q", "y"))


class TestGcTest:
    def test_strong_coupling_detected_with_defaults(self):
        panel = coupled_pair()
        result = gc_test(panel, "q", "y")
        assert result.p_value < 0.01

    def test_reverse_direction_not_detected(self):
        panel = coupled_pair()
        result = gc_test(panel, "y", "q", GcConfig(lags=2))
        assert result.p_value > 0.05

    def test_source_equals_target(self):
        panel = coupled_pair(200)
        with pytest.raises(ValueError, match="source and target"):
            gc_test(panel, "q", "q")

    def test_unknown_series(self):
        panel = coupled_pair(200)
        with pytest.raises(KeyError):
            gc_test(panel, "q", "z")

    def test_error_vectors_cover_the_test_block(self):
        panel = coupled_pair(400)
        config = GcConfig(lags=3)
        result = gc_test(panel, "q", "y", config)
        n_design = 400 - 3
        n_train = int(np.floor(0.7 * n_design))
        expected_test = n_design - n_train - 3
        assert result.errors_restricted.shape == (expected_test,)
        assert result.errors_unrestricted.shape == (expected_test,)
        assert 0.0 <= result.p_value <= 1.0

    def test_deterministic(self):
        panel = coupled_pair(500)
        a = gc_test(panel, "q", "y", GcConfig(lags=2))
        b = gc_test(panel, "q", "y", GcConfig(lags=2))
        assert a.p_value == b.p_value
        np.testing.assert_array_equal(a.errors_unrestricted, b.errors_unrestricted)

    def test_wilcoxon_variant_runs(self):
        panel = coupled_pair(600)
        result = gc_test(panel, "q", "y", GcConfig(lags=2, test="wilcoxon"))
        assert result.outcome.method == "wilcoxon"
        assert result.p_value < 0.01

    def test_needs_two_series(self):
        panel = TimeSeriesPanel(values=np.random.default_rng(0).normal(size=(50, 1)), names=("a",))
        with pytest.raises(ValueError, match="at least 2"):
            gc_test(panel, "a", "a")

    def test_auto_gamma_tracks_each_design_width(self, monkeypatch):
        # restricted and unrestricted fits share lambda but resolve their own
        # gamma: 1/(L*G) unrestricted, 1/(L*(G-1)) restricted
        import nlgranger.engine as engine_module

        fitted = []
        original = engine_module.krr_fit

        def spy(train, config):
            model = original(train, config)
            fitted.append((train.X.shape[1], model.gamma, model.ridge_lambda))
            return model

        monkeypatch.setattr(engine_module, "krr_fit", spy)
        rng = np.random.default_rng(11)
        panel = TimeSeriesPanel(values=rng.normal(size=(200, 3)), names=("a", "b", "c"))
        gc_test(panel, "a", "b", GcConfig(lags=2))
        widths = {w for w, _, _ in fitted}
        assert widths == {6, 4}
        for width, gamma, lam in fitted:
            assert gamma == 1.0 / width
            assert lam == 1.0


class TestGcTestLinear:
    def test_detects_linear5_edge(self):
        for seed in range(5):
            panel, _ = generate(NetworkSpec("linear5", 1000, seed=seed))
            result = gc_test_linear(panel, "x1", "x2", GcConfig(lags=3))
            assert result.p_value < 0.05, f"seed {seed}"

    def test_uses_all_rows_without_split(self):
        panel, _ = generate(NetworkSpec("linear5", 500, seed=0))
        result = gc_test_linear(panel, "x1", "x2", GcConfig(lags=2))
        assert result.errors_unrestricted.shape == (498,)

    def test_null_pvalues_uniform(self):
        pvals = []
        for k in range(500):
            rng = np.random.default_rng(20_000 + k)
            panel = TimeSeriesPanel(values=rng.normal(size=(120, 2)), names=("a", "b"))
            pvals.append(gc_test_linear(panel, "a", "b", GcConfig(lags=1)).p_value)
        statistic = scipy.stats.kstest(pvals, "uniform").statistic
        assert statistic < 0.07

    def test_rank_deficient_design_names_columns(self):
        rng = np.random.default_rng(1)
        col = rng.normal(size=300)
        panel = TimeSeriesPanel(values=np.column_stack([col, col, rng.normal(size=300)]),
                                names=("a", "b", "c"))
        with pytest.raises(ValueError, match="columns"):
            gc_test_linear(panel, "c", "a", GcConfig(lags=2))

    def test_insufficient_rows_for_dof(self):
        rng = np.random.default_rng(2)
        panel = TimeSeriesPanel(values=rng.normal(size=(4, 2)), names=("a", "b"))
        with pytest.raises(ValueError, match="rows"):
            gc_test_linear(panel, "a", "b", GcConfig(lags=1))

    def test_quantile_setting_does_not_touch_linear_path(self):
        panel, _ = generate(NetworkSpec("linear5", 400, seed=3))
        with_q = gc_test_linear(panel, "x1", "x2", GcConfig(lags=2, n_quantiles=1000))
        without = gc_test_linear(panel, "x1", "x2", GcConfig(lags=2, n_quantiles=None))
        assert with_q.p_value == without.p_value

    def test_methods_disagree_but_share_shape(self):
        panel, _ = generate(NetworkSpec("linear5", 500, seed=4))
        krr = gc_test(panel, "x1", "x2", GcConfig(lags=2))
        lin = gc_test(panel, "x1", "x2", GcConfig(lags=2, method="linear_f"))
        assert krr.outcome.method == "sign"
        assert lin.outcome.method == "f_test"


class TestGcNetwork:
    def test_all_offdiagonal_cells_populated(self):
        panel, _ = generate(NetworkSpec("linear5", 400, seed=5))
        matrix = gc_network(panel, GcConfig(lags=2))
        off_diag = ~np.eye(5, dtype=bool)
        assert np.all(np.isfinite(matrix.values[off_diag]))
        assert np.all(np.isnan(np.diag(matrix.values)))
        assert not matrix.failures

    def test_worker_count_does_not_change_output(self):
        panel, _ = generate(NetworkSpec("linear5", 400, seed=6))
        serial = gc_network(panel, GcConfig(lags=2), workers=1)
        threaded = gc_network(panel, GcConfig(lags=2), workers=4)
        np.testing.assert_array_equal(serial.values, threaded.values)

    def test_failing_pair_recorded_not_fatal(self, monkeypatch):
        import nlgranger.engine as engine_module

        original = engine_module._pair_result

        def flaky(data, unrestricted_errors, restricted, i, j, config, lags):
            if (data.names[i], data.names[j]) == ("x1", "x3"):
                raise RuntimeError("injected failure")
            return original(data, unrestricted_errors, restricted, i, j, config, lags)

        monkeypatch.setattr(engine_module, "_pair_result", flaky)
        panel, _ = generate(NetworkSpec("linear5", 300, seed=7))
        matrix = gc_network(panel, GcConfig(lags=2), workers=3)
        assert matrix.failures == {("x1", "x3"): "injected failure"}
        assert np.isnan(matrix.entry("x1", "x3"))
        off_diag = ~np.eye(5, dtype=bool)
        assert np.isnan(matrix.values[off_diag]).sum() == 1  # all others ran

    def test_failing_design_poisons_only_its_source_pairs(self, monkeypatch):
        import nlgranger.engine as engine_module

        original = engine_module._design_bundle

        def flaky(data, excluded, kernel_config):
            if excluded == 0:  # restricted design that drops x1
                raise RuntimeError("factorization exploded")
            return original(data, excluded, kernel_config)

        monkeypatch.setattr(engine_module, "_design_bundle", flaky)
        panel, _ = generate(NetworkSpec("linear5", 300, seed=7))
        matrix = gc_network(panel, GcConfig(lags=2))
        assert set(matrix.failures) == {("x1", t) for t in ("x2", "x3", "x4", "x5")}
        assert all("exploded" in msg for msg in matrix.failures.values())
        assert np.isfinite(matrix.entry("x2", "x1"))

    def test_network_cells_match_isolated_tests_bitwise(self):
        panel, _ = generate(NetworkSpec("nonlinear5", 400, seed=9))
        config = GcConfig(lags=2)
        matrix = gc_network(panel, config, workers=2)
        for source, target in (("x1", "x2"), ("x4", "x5"), ("x3", "x1")):
            single = gc_test(panel, source, target, config)
            assert matrix.entry(source, target) == single.p_value

    def test_lag_resolved_once_for_whole_panel(self):
        panel, _ = generate(NetworkSpec("linear5", 300, seed=8))
        matrix = gc_network(panel, GcConfig(lags=4))
        assert matrix.lag_used == 4
