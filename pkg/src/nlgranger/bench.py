"""Experiment driver: generate sets, pick lags, recover networks, score them.

For every (network, length) combination the driver generates ``n_sets``
independent panels, fixes one lag order for the whole combination, runs the
all-pairs recovery for each set, and aggregates per-set metrics into
distribution summaries. Wall time is recorded around the recovery phase
only, so runtime comparisons are not polluted by generation or scoring.

Set seeds derive as ``base_seed XOR set_index``: adding networks or lengths
to a plan never changes any other combination's data.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .engine import GcConfig, PValueMatrix, _preprocessed, resolve_lags, sweep_panel
from .evaluation import (
    EdgeScores,
    NetworkEvalReport,
    edge_scores,
    evaluate_scores,
    gmean_optimal_threshold,
)
from .panel import TimeSeriesPanel
from .simnet import NETWORK_NAMES, GroundTruth, NetworkSpec, generate

SUMMARY_STATS = ("median", "p25", "p75", "min", "max")
MAX_FAILED_FRACTION = 0.2


@dataclass(frozen=True)
class ExperimentPlan:
    networks: tuple[str, ...]
    lengths: tuple[int, ...]
    n_sets: int = 50
    base_seed: int = 0
    workers: int = 1
    burn_in: int = 500
    config: GcConfig = field(default_factory=GcConfig)

    def __post_init__(self):
        if not self.networks:
            raise ValueError("plan needs at least one network")
        unknown = [n for n in self.networks if n not in NETWORK_NAMES]
        if unknown:
            raise ValueError(f"unknown networks: {unknown}")
        if not self.lengths or any(length < 1 for length in self.lengths):
            raise ValueError("lengths must be positive")
        if self.n_sets < 1:
            raise ValueError("n_sets must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be nonnegative")


@dataclass(frozen=True)
class RuntimeRecord:
    network: str
    length: int
    wall_seconds: float
    workers: int


@dataclass(frozen=True)
class SetResult:
    """One independent set: its metrics, or the error that stopped it."""

    network: str
    length: int
    set_index: int
    seed: int
    report: NetworkEvalReport | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.report is None


@dataclass(frozen=True)
class CombinationSummary:
    network: str
    length: int
    lag_used: int | None
    n_sets: int
    n_failed: int
    valid: bool
    gmean_threshold: float | None
    metrics: dict[str, dict[str, float]]


@dataclass(frozen=True)
class ExperimentResult:
    set_results: list[SetResult]
    summaries: list[CombinationSummary]
    runtimes: list[RuntimeRecord]


def summarize(reports: list[NetworkEvalReport]) -> dict[str, dict[str, float]]:
    """median / quartiles / extremes for every metric across reports."""
    if not reports:
        raise ValueError("no reports to summarize")
    table = {}
    rows = [r.to_dict() for r in reports]
    for metric in rows[0]:
        values = np.array([row[metric] for row in rows])
        table[metric] = {
            "median": float(np.median(values)),
            "p25": float(np.percentile(values, 25)),
            "p75": float(np.percentile(values, 75)),
            "min": float(values.min()),
            "max": float(values.max()),
        }
    return table


def _recover_matrices(
    panels: dict[int, TimeSeriesPanel],
    config: GcConfig,
    lags: int,
    pool: concurrent.futures.ThreadPoolExecutor | None,
) -> dict[int, PValueMatrix]:
    """All-pairs recovery for many sets over one shared worker pool.

    Sets are distributed across the pool; each set's sweep runs serially
    inside its task (design factorizations there are already shared across
    pairs, and set-level tasks keep live memory bounded).
    """
    prepared = {k: _preprocessed(panel, config, lags) for k, panel in panels.items()}
    if pool is None:
        return {k: sweep_panel(p, config, lags) for k, p in prepared.items()}
    futures = {
        k: pool.submit(sweep_panel, p, config, lags) for k, p in prepared.items()
    }
    return {k: future.result() for k, future in futures.items()}


def run_experiment(plan: ExperimentPlan) -> ExperimentResult:
    """Execute the full plan; per-set failures are recorded, not fatal."""
    set_results: list[SetResult] = []
    summaries: list[CombinationSummary] = []
    runtimes: list[RuntimeRecord] = []
    pool = (
        concurrent.futures.ThreadPoolExecutor(max_workers=plan.workers)
        if plan.workers > 1
        else None
    )
    try:
        for network in plan.networks:
            for length in plan.lengths:
                combo = _run_combination(plan, network, length, pool)
                set_results.extend(combo[0])
                summaries.append(combo[1])
                if combo[2] is not None:
                    runtimes.append(combo[2])
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentResult(
        set_results=set_results, summaries=summaries, runtimes=runtimes
    )


def _run_combination(
    plan: ExperimentPlan,
    network: str,
    length: int,
    pool: concurrent.futures.ThreadPoolExecutor | None,
) -> tuple[list[SetResult], CombinationSummary, RuntimeRecord | None]:
    seeds = [plan.base_seed ^ k for k in range(plan.n_sets)]
    panels: dict[int, TimeSeriesPanel] = {}
    truths: dict[int, GroundTruth] = {}
    errors: dict[int, str] = {}
    for k, seed in enumerate(seeds):
        try:
            panels[k], truths[k] = generate(
                NetworkSpec(network, length, seed=seed, burn_in=plan.burn_in)
            )
        except Exception as exc:
            errors[k] = f"generation failed: {exc}"

    lag_used: int | None = None
    matrices: dict[int, PValueMatrix] = {}
    runtime = None
    if panels:
        first_panel = panels[min(panels)]
        lag_used = resolve_lags(first_panel, plan.config)
        started = time.perf_counter()
        with threadpool_limits(limits=1):
            matrices = _recover_matrices(panels, plan.config, lag_used, pool)
        runtime = RuntimeRecord(
            network=network,
            length=length,
            wall_seconds=time.perf_counter() - started,
            workers=plan.workers,
        )

    scores: dict[int, EdgeScores] = {}
    for k, matrix in matrices.items():
        if matrix.failures:
            sample = next(iter(matrix.failures.items()))
            errors[k] = (
                f"{len(matrix.failures)} pairwise tests failed,"
                f" e.g. {sample[0][0]}->{sample[0][1]}: {sample[1]}"
            )
        else:
            scores[k] = edge_scores(matrix, truths[k])

    gmean_threshold = (
        gmean_optimal_threshold(list(scores.values())) if scores else None
    )
    results = []
    reports = []
    for k, seed in enumerate(seeds):
        if k in scores:
            report = evaluate_scores(scores[k], gmean_threshold=gmean_threshold)
            reports.append(report)
            results.append(
                SetResult(network=network, length=length, set_index=k, seed=seed, report=report)
            )
        else:
            results.append(
                SetResult(
                    network=network,
                    length=length,
                    set_index=k,
                    seed=seed,
                    error=errors.get(k, "unknown failure"),
                )
            )

    n_failed = sum(r.failed for r in results)
    summary = CombinationSummary(
        network=network,
        length=length,
        lag_used=lag_used,
        n_sets=plan.n_sets,
        n_failed=n_failed,
        valid=n_failed <= MAX_FAILED_FRACTION * plan.n_sets,
        gmean_threshold=gmean_threshold,
        metrics=summarize(reports) if reports else {},
    )
    return results, summary, runtime


_METRIC_COLUMNS = (
    "auc",
    "brier",
    "acc_at_p05",
    "bal_acc_at_p05",
    "gmean_threshold",
    "acc_at_gmean",
    "bal_acc_at_gmean",
)


def write_metrics_csv(result: ExperimentResult, path) -> None:
    """One row per independent set; failed sets keep their error message."""
    rows = sorted(result.set_results, key=lambda r: (r.network, r.length, r.set_index))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["network", "length", "set_index", "seed", "status", *_METRIC_COLUMNS, "error"]
        )
        for r in rows:
            if r.report is None:
                writer.writerow(
                    [r.network, r.length, r.set_index, r.seed, "failed"]
                    + [""] * len(_METRIC_COLUMNS)
                    + [r.error]
                )
            else:
                metrics = r.report.to_dict()
                writer.writerow(
                    [r.network, r.length, r.set_index, r.seed, "ok"]
                    + [repr(metrics[c]) for c in _METRIC_COLUMNS]
                    + [""]
                )


def write_summary_json(result: ExperimentResult, path) -> None:
    payload = [
        {
            "network": s.network,
            "length": s.length,
            "lag_used": s.lag_used,
            "n_sets": s.n_sets,
            "n_failed": s.n_failed,
            "valid": s.valid,
            "gmean_threshold": s.gmean_threshold,
            "metrics": s.metrics,
        }
        for s in result.summaries
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_runtimes_csv(result: ExperimentResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["network", "length", "wall_seconds", "workers"])
        for r in result.runtimes:
            writer.writerow([r.network, r.length, repr(r.wall_seconds), r.workers])


def write_outputs(result: ExperimentResult, out_dir) -> dict[str, Path]:
    """Write the three delimited/JSON outputs into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": out / "metrics.csv",
        "summary": out / "summary.json",
        "runtimes": out / "runtimes.csv",
    }
    write_metrics_csv(result, paths["metrics"])
    write_summary_json(result, paths["summary"])
    write_runtimes_csv(result, paths["runtimes"])
    return paths
