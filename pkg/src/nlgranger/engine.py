"""Directed Granger-causality tests and all-pairs network recovery.

One directed test asks whether the lags of a source series improve
out-of-sample prediction of a target series beyond what every other series
already provides. Two prediction engines are available:

* ``krr``: kernel ridge regression with the RBF kernel, trained on a leading
  time split and scored on the trailing one; the restricted (source-free)
  and unrestricted error magnitudes are compared with a one-sided sign test
  (or Wilcoxon signed-rank test).
* ``linear_f``: the classical linear baseline; ordinary least squares with
  intercept on all rows, compared with the nested-model F-test. The linear
  path always runs on the raw series, mirroring the classical formulation.

All-pairs sweeps factor each distinct design's regularized Gram matrix once
(the unrestricted design is shared by every pair, each restricted design by
all targets of one source), then reduce per-pair work to triangular solves
and kernel matvecs. The per-pair numbers are identical to running each test
in isolation; only repeated factorizations are avoided.

BLAS thread pools are capped to one thread inside sweeps: parallelism lives
at the pair/set level, and oversubscribed BLAS threading is slower for the
many small-to-medium factorizations this workload generates.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from threadpoolctl import threadpool_limits

from .cao import PLATEAU_TOL, select_lag_cao
from .kernel_ridge import (
    KernelConfig,
    KernelSystem,
    cross_kernel,
    factor_kernel_system,
    krr_fit,
    krr_predict,
    solve_dual,
)
from .panel import (
    SplitSpec,
    TimeSeriesPanel,
    build_lag_design,
    quantile_transform_panel,
    split_train_test,
)
from .stattests import TestOutcome, granger_f_test, sign_test, wilcoxon_signed_rank

AUTO_LAGS = "cao"


@dataclass(frozen=True)
class GcConfig:
    """Full configuration of one causality test.

    Defaults reproduce the reference setup: automatic lag selection, 70/30
    time split with a lag-sized gap, unit ridge penalty with gamma matched
    to the design width, 1000-quantile preprocessing, and the sign test.
    """

    lags: int | str = AUTO_LAGS
    split: SplitSpec = field(default_factory=SplitSpec)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    test: str = "sign"
    n_quantiles: int | None = 1000
    method: str = "krr"
    cao_d_max: int = 10
    cao_tol: float = PLATEAU_TOL

    def __post_init__(self):
        if isinstance(self.lags, str):
            if self.lags != AUTO_LAGS:
                raise ValueError(f"lags must be a positive integer or {AUTO_LAGS!r}")
        elif self.lags < 1:
            raise ValueError("lags must be >= 1")
        if self.test not in ("sign", "wilcoxon"):
            raise ValueError("test must be 'sign' or 'wilcoxon'")
        if self.method not in ("krr", "linear_f"):
            raise ValueError("method must be 'krr' or 'linear_f'")
        if self.n_quantiles is not None and self.n_quantiles < 2:
            raise ValueError("n_quantiles must be >= 2 (or None to disable)")
        if self.cao_d_max < 2:
            raise ValueError("cao_d_max must be >= 2")


@dataclass(frozen=True)
class GcTestResult:
    """Outcome of one directed test, with the per-row test-set errors."""

    source: str
    target: str
    outcome: TestOutcome
    errors_restricted: np.ndarray
    errors_unrestricted: np.ndarray
    lags_used: int
    config: GcConfig

    @property
    def p_value(self) -> float:
        return self.outcome.p_value


@dataclass(frozen=True)
class PValueMatrix:
    """All-pairs test results; entry (i, j) is the p-value for i driving j."""

    names: tuple[str, ...]
    values: np.ndarray
    lag_used: int
    failures: dict[tuple[str, str], str] = field(default_factory=dict)

    def entry(self, source: str, target: str) -> float:
        i = self.names.index(source)
        j = self.names.index(target)
        return float(self.values[i, j])


def resolve_lags(panel: TimeSeriesPanel, config: GcConfig) -> int:
    """The configured lag count, running embedding-dimension selection on
    the raw panel when lags are automatic."""
    if isinstance(config.lags, int):
        return config.lags
    return select_lag_cao(panel, d_max=config.cao_d_max, tol=config.cao_tol)


def _preprocessed(panel: TimeSeriesPanel, config: GcConfig, lags: int) -> TimeSeriesPanel:
    if config.n_quantiles is None or config.method == "linear_f":
        return panel
    # Quantile grids are fitted on the rows visible to training only: the
    # lag window plus targets of the train split, never the test block.
    n_design_rows = panel.n_rows - lags
    n_train = int(np.floor(config.split.train_fraction * n_design_rows))
    fit_rows = min(n_train + lags, panel.n_rows)
    return quantile_transform_panel(panel, config.n_quantiles, fit_rows=fit_rows)


def gc_test(
    panel: TimeSeriesPanel, source: str, target: str, config: GcConfig = GcConfig()
) -> GcTestResult:
    """Test whether ``source`` Granger-causes ``target`` within the panel.

    All series other than the source enter both models as confounders. The
    restricted model drops only the source's lags.
    """
    lags = resolve_lags(panel, config)
    prepared = _preprocessed(panel, config, lags)
    with threadpool_limits(limits=1):
        return _gc_test_prepared(prepared, source, target, config, lags)


def _gc_test_prepared(
    panel: TimeSeriesPanel, source: str, target: str, config: GcConfig, lags: int
) -> GcTestResult:
    if panel.n_series < 2:
        raise ValueError("a causality test needs at least 2 series")
    if source == target:
        raise ValueError(f"source and target are both {source!r}")
    panel.index_of(source)
    panel.index_of(target)
    if config.method == "linear_f":
        return _linear_test(panel, source, target, config, lags)

    unrestricted = build_lag_design(panel, target, frozenset(), lags)
    restricted = build_lag_design(panel, target, frozenset({source}), lags)
    train_u, test_u = split_train_test(unrestricted, config.split)
    train_r, test_r = split_train_test(restricted, config.split)

    model_u = krr_fit(train_u, config.kernel)
    model_r = krr_fit(train_r, config.kernel)
    errors_u = krr_predict(model_u, test_u.X) - test_u.y_true
    errors_r = krr_predict(model_r, test_r.X) - test_r.y_true
    outcome = _delta_outcome(errors_r, errors_u, config)
    return GcTestResult(
        source=source,
        target=target,
        outcome=outcome,
        errors_restricted=errors_r,
        errors_unrestricted=errors_u,
        lags_used=lags,
        config=config,
    )


def _delta_outcome(
    errors_restricted: np.ndarray, errors_unrestricted: np.ndarray, config: GcConfig
) -> TestOutcome:
    delta = np.abs(errors_restricted) - np.abs(errors_unrestricted)
    if config.test == "sign":
        return sign_test(delta)
    return wilcoxon_signed_rank(delta)


def gc_test_linear(
    panel: TimeSeriesPanel, source: str, target: str, config: GcConfig | None = None
) -> GcTestResult:
    """Classical linear Granger test: OLS on all rows plus the F-test."""
    config = replace(config or GcConfig(), method="linear_f")
    lags = resolve_lags(panel, config)
    return _gc_test_prepared(panel, source, target, config, lags)


def _ols_rss(X: np.ndarray, y: np.ndarray, label: str) -> tuple[float, np.ndarray]:
    design = np.column_stack([np.ones(X.shape[0]), X])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        _, _, pivots = scipy.linalg.qr(design, mode="economic", pivoting=True)
        dependent = sorted(int(p) - 1 for p in pivots[rank:] if p > 0)
        raise ValueError(
            f"rank-deficient {label} design: columns {dependent} are linearly dependent"
        )
    residuals = y - design @ coef
    return float(residuals @ residuals), residuals


def _linear_test(
    panel: TimeSeriesPanel, source: str, target: str, config: GcConfig, lags: int
) -> GcTestResult:
    unrestricted = build_lag_design(panel, target, frozenset(), lags)
    restricted = build_lag_design(panel, target, frozenset({source}), lags)
    n_rows = unrestricted.n_rows
    df_den = n_rows - panel.n_series * lags - 1
    if df_den <= 0:
        raise ValueError(
            f"{n_rows} rows cannot support {panel.n_series * lags} lag terms"
            " plus an intercept in the unrestricted fit"
        )
    rss_u, resid_u = _ols_rss(unrestricted.X, unrestricted.y_true, "unrestricted")
    rss_r, resid_r = _ols_rss(restricted.X, restricted.y_true, "restricted")
    outcome = granger_f_test(rss_r, rss_u, lags, n_rows, df_denominator=df_den)
    return GcTestResult(
        source=source,
        target=target,
        outcome=outcome,
        errors_restricted=resid_r,
        errors_unrestricted=resid_u,
        lags_used=lags,
        config=config,
    )


def ordered_pairs(names: tuple[str, ...]) -> list[tuple[str, str]]:
    return [(s, t) for s in names for t in names if s != t]


# ---------------------------------------------------------------------------
# all-pairs sweep with shared design factorizations


@dataclass(frozen=True)
class _SweepData:
    """Per-panel ingredients shared by every pairwise test."""

    names: tuple[str, ...]
    blocks: tuple[np.ndarray, ...]  # per-series lag block, N x L each
    targets: np.ndarray  # N x G next-step values, aligned with the blocks
    train: slice
    test: slice


@dataclass(frozen=True)
class _DesignBundle:
    """Factorized training system plus the test-vs-train kernel block."""

    system: KernelSystem
    cross: np.ndarray


@dataclass(frozen=True)
class _TaskError:
    message: str


def _sweep_data(panel: TimeSeriesPanel, config: GcConfig, lags: int) -> _SweepData:
    if panel.n_series < 2:
        raise ValueError("a causality test needs at least 2 series")
    if panel.n_rows <= lags:
        raise ValueError(
            f"panel length {panel.n_rows} does not exceed lag count {lags}"
        )
    n_rows = panel.n_rows - lags
    gap = config.split.resolve_gap(lags)
    n_train = int(np.floor(config.split.train_fraction * n_rows))
    test_start = n_train + gap
    if n_train < 1:
        raise ValueError(f"empty train split for {n_rows} rows")
    if test_start >= n_rows:
        raise ValueError(f"empty test split: {n_rows} rows, train {n_train}, gap {gap}")
    blocks = []
    for name in panel.names:
        col = panel.column(name)
        lag_cols = [col[lags - l : lags - l + n_rows] for l in range(1, lags + 1)]
        blocks.append(np.column_stack(lag_cols))
    return _SweepData(
        names=panel.names,
        blocks=tuple(blocks),
        targets=panel.values[lags:, :],
        train=slice(0, n_train),
        test=slice(test_start, n_rows),
    )


def _design_bundle(
    data: _SweepData, excluded: int | None, kernel_config: KernelConfig
) -> _DesignBundle:
    kept = [block for i, block in enumerate(data.blocks) if i != excluded]
    X = np.hstack(kept)
    system = factor_kernel_system(X[data.train], kernel_config)
    cross = cross_kernel(X[data.test], X[data.train], system.gamma)
    return _DesignBundle(system=system, cross=cross)


def _bundle_errors(data: _SweepData, bundle: _DesignBundle, target_index: int) -> np.ndarray:
    y = data.targets[:, target_index]
    return bundle.cross @ solve_dual(bundle.system, y[data.train]) - y[data.test]


def _pair_result(
    data: _SweepData,
    unrestricted_errors: np.ndarray,
    restricted: _DesignBundle,
    source_index: int,
    target_index: int,
    config: GcConfig,
    lags: int,
) -> GcTestResult:
    errors_r = _bundle_errors(data, restricted, target_index)
    outcome = _delta_outcome(errors_r, unrestricted_errors, config)
    return GcTestResult(
        source=data.names[source_index],
        target=data.names[target_index],
        outcome=outcome,
        errors_restricted=errors_r,
        errors_unrestricted=unrestricted_errors,
        lags_used=lags,
        config=config,
    )


def _run_tasks(tasks, runner, executor):
    """Map tasks to results, capturing exceptions as _TaskError values."""
    outcomes = {}
    if executor is not None:
        futures = {executor.submit(runner, task): task for task in tasks}
        for future in concurrent.futures.as_completed(futures):
            task = futures[future]
            try:
                outcomes[task] = future.result()
            except Exception as exc:
                outcomes[task] = _TaskError(str(exc))
    else:
        for task in tasks:
            try:
                outcomes[task] = runner(task)
            except Exception as exc:
                outcomes[task] = _TaskError(str(exc))
    return outcomes


def _source_group(
    panel: TimeSeriesPanel,
    data: _SweepData,
    unrestricted_errors: dict,
    source_index: int,
    config: GcConfig,
    lags: int,
) -> dict[int, float | _TaskError]:
    """All tests sharing one source: one restricted design, n-1 targets."""
    count = len(data.names)
    targets = [j for j in range(count) if j != source_index]
    out: dict[int, float | _TaskError] = {}
    if config.method == "linear_f":
        for j in targets:
            try:
                result = _gc_test_prepared(
                    panel, data.names[source_index], data.names[j], config, lags
                )
                out[j] = result.p_value
            except Exception as exc:
                out[j] = _TaskError(str(exc))
        return out

    try:
        restricted = _design_bundle(data, source_index, config.kernel)
    except Exception as exc:
        return {j: _TaskError(str(exc)) for j in targets}
    for j in targets:
        errors_u = unrestricted_errors[j]
        if isinstance(errors_u, _TaskError):
            out[j] = errors_u
            continue
        try:
            result = _pair_result(data, errors_u, restricted, source_index, j, config, lags)
            out[j] = result.p_value
        except Exception as exc:
            out[j] = _TaskError(str(exc))
    return out


def sweep_panel(
    panel: TimeSeriesPanel,
    config: GcConfig,
    lags: int,
    executor: concurrent.futures.Executor | None = None,
) -> PValueMatrix:
    """All-pairs recovery on one preprocessed panel.

    The unrestricted design is factored once and shared by every pair; each
    source's restricted design is factored once and shared by its targets.
    Tasks are per-source groups, so at most workers+1 factorizations are
    alive at a time. Failures are recorded per cell, never raised.
    """
    names = panel.names
    count = len(names)
    values = np.full((count, count), np.nan)
    failures: dict[tuple[str, str], str] = {}
    try:
        data = _sweep_data(panel, config, lags)
        unrestricted_errors: dict = {}
        if config.method == "krr":
            try:
                bundle_u = _design_bundle(data, None, config.kernel)
                for j in range(count):
                    try:
                        unrestricted_errors[j] = _bundle_errors(data, bundle_u, j)
                    except Exception as exc:
                        unrestricted_errors[j] = _TaskError(str(exc))
            except Exception as exc:
                unrestricted_errors = {j: _TaskError(str(exc)) for j in range(count)}
        groups = _run_tasks(
            list(range(count)),
            lambda i: _source_group(panel, data, unrestricted_errors, i, config, lags),
            executor,
        )
        for i in range(count):
            group = groups[i]
            if isinstance(group, _TaskError):  # pragma: no cover - defensive
                group = {j: group for j in range(count) if j != i}
            for j, out in group.items():
                if isinstance(out, _TaskError):
                    failures[(names[i], names[j])] = out.message
                else:
                    values[i, j] = out
    except Exception as exc:
        failures = {pair: str(exc) for pair in ordered_pairs(names)}
    return PValueMatrix(names=names, values=values, lag_used=lags, failures=failures)


def gc_network(
    panel: TimeSeriesPanel,
    config: GcConfig = GcConfig(),
    workers: int = 1,
) -> PValueMatrix:
    """Run the directed test for every ordered pair of series.

    The lag order is resolved once for the whole panel and preprocessing is
    fitted once, so every pair sees identical inputs; a pair's numbers equal
    what gc_test would produce in isolation. A failing pair records an error
    message in ``failures`` and a NaN cell instead of aborting the sweep.
    Output is identical for any worker count.
    """
    lags = resolve_lags(panel, config)
    prepared = _preprocessed(panel, config, lags)
    with threadpool_limits(limits=1):
        if workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                return sweep_panel(prepared, config, lags, executor=pool)
        return sweep_panel(prepared, config, lags)
