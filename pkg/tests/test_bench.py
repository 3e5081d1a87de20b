"""Experiment driver: aggregation, determinism, failure handling, outputs."""

import pytest

from nlgranger.bench import (
    ExperimentPlan,
    run_experiment,
    summarize,
    write_outputs,
)
from nlgranger.engine import GcConfig
from nlgranger.evaluation import NetworkEvalReport
from nlgranger.figures import render_metric_boxplots


def report_with(value: float) -> NetworkEvalReport:
    return NetworkEvalReport(
        auc=value, brier=value, acc_at_p05=value, bal_acc_at_p05=value,
        gmean_threshold=value, acc_at_gmean=value, bal_acc_at_gmean=value,
    )


def small_plan(**overrides) -> ExperimentPlan:
    defaults = dict(
        networks=("linear5",),
        lengths=(300,),
        n_sets=2,
        base_seed=0,
        workers=1,
        config=GcConfig(lags=2),
    )
    defaults.update(overrides)
    return ExperimentPlan(**defaults)


class TestPlanValidation:
    def test_unknown_network(self):
        with pytest.raises(ValueError, match="unknown"):
            small_plan(networks=("linear6",))

    def test_empty_lengths(self):
        with pytest.raises(ValueError, match="lengths"):
            small_plan(lengths=())

    def test_bad_sets(self):
        with pytest.raises(ValueError, match="n_sets"):
            small_plan(n_sets=0)


class TestSummarize:
    def test_single_report_collapses(self):
        table = summarize([report_with(0.8)])
        for stats in table.values():
            assert set(stats.values()) == {0.8}

    def test_five_point_summary(self):
        reports = [report_with(v) for v in (1.0, 2.0, 3.0, 4.0, 5.0)]
        stats = summarize(reports)["auc"]
        assert stats == {"median": 3.0, "p25": 2.0, "p75": 4.0, "min": 1.0, "max": 5.0}

    def test_permutation_invariant(self):
        values = [0.3, 0.9, 0.1, 0.7]
        a = summarize([report_with(v) for v in values])
        b = summarize([report_with(v) for v in reversed(values)])
        assert a == b

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])


class TestRunExperiment:
    def test_shapes_and_seeds(self):
        result = run_experiment(small_plan())
        assert len(result.set_results) == 2
        assert [r.seed for r in result.set_results] == [0, 1]
        assert all(not r.failed for r in result.set_results)
        assert len(result.summaries) == 1
        assert result.summaries[0].valid
        assert result.summaries[0].lag_used == 2
        assert len(result.runtimes) == 1
        assert result.runtimes[0].wall_seconds > 0

    def test_seed_derivation_xor(self):
        result = run_experiment(small_plan(base_seed=6, n_sets=3))
        assert [r.seed for r in result.set_results] == [6 ^ 0, 6 ^ 1, 6 ^ 2]

    def test_deterministic_across_worker_counts(self, tmp_path):
        a = run_experiment(small_plan(workers=1))
        b = run_experiment(small_plan(workers=3))
        write_outputs(a, tmp_path / "a")
        write_outputs(b, tmp_path / "b")
        assert (tmp_path / "a" / "metrics.csv").read_bytes() == (
            tmp_path / "b" / "metrics.csv"
        ).read_bytes()
        assert (tmp_path / "a" / "summary.json").read_bytes() == (
            tmp_path / "b" / "summary.json"
        ).read_bytes()

    def test_adding_networks_leaves_results_untouched(self):
        solo = run_experiment(small_plan())
        both = run_experiment(small_plan(networks=("nonlinear5", "linear5")))
        solo_rows = {
            (r.network, r.set_index): r.report.to_dict() for r in solo.set_results
        }
        both_rows = {
            (r.network, r.set_index): r.report.to_dict()
            for r in both.set_results
            if r.network == "linear5"
        }
        assert solo_rows == both_rows

    def test_diverging_generator_marks_combination_invalid(self):
        result = run_experiment(
            small_plan(networks=("nonlinear9", "linear5"), n_sets=2)
        )
        by_network = {s.network: s for s in result.summaries}
        assert not by_network["nonlinear9"].valid
        assert by_network["nonlinear9"].n_failed == 2
        assert by_network["linear5"].valid
        failed = [r for r in result.set_results if r.network == "nonlinear9"]
        assert all("generation failed" in r.error for r in failed)


class TestOutputs:
    def test_files_written_and_parse(self, tmp_path):
        result = run_experiment(small_plan())
        paths = write_outputs(result, tmp_path)
        metrics = (tmp_path / "metrics.csv").read_text().strip().splitlines()
        assert len(metrics) == 3  # header + 2 sets
        assert metrics[0].startswith("network,length,set_index,seed,status,auc")
        runtimes = (tmp_path / "runtimes.csv").read_text().strip().splitlines()
        assert len(runtimes) == 2
        assert paths["summary"].exists()

    def test_boxplot_rendering(self, tmp_path):
        result = run_experiment(small_plan(n_sets=3))
        paths = render_metric_boxplots(result, tmp_path / "figs")
        assert len(paths) == 6
        for path in paths:
            assert path.exists() and path.stat().st_size > 0

    def test_boxplots_skip_when_everything_failed(self, tmp_path):
        result = run_experiment(small_plan(networks=("nonlinear9",)))
        assert render_metric_boxplots(result, tmp_path / "figs") == []
