"""Time-series panels, lag-matrix construction, splitting, and quantile scaling.

A panel holds G aligned, gap-free, equally spaced series. Everything here is
a pure function over immutable arrays; nothing mutates its inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeSeriesPanel:
    """G aligned series of common length, rows in time order.

    Args:
        values: float matrix, one row per time point, one column per series.
        names: unique identifier per column.
    """

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("panel values must be a 2-D matrix")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if len(self.names) != values.shape[1]:
            raise ValueError(
                f"{len(self.names)} names for {values.shape[1]} columns"
            )
        if len(set(self.names)) != len(self.names):
            raise ValueError("series names must be unique")
        if values.shape[1] < 1:
            raise ValueError("a panel needs at least one series")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel contains NaN or infinite values")

    @property
    def n_series(self) -> int:
        return self.values.shape[1]

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index_of(name)]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown series {name!r}") from None


@dataclass(frozen=True)
class LagDesign:
    """Lagged design matrix plus the aligned one-step-ahead target.

    Row t concatenates lags 1..lag_count of every included series; columns
    are grouped per series with lag-1 first inside each group. y_true[t] is
    the target value one step after the most recent lag in row t.
    """

    X: np.ndarray
    y_true: np.ndarray
    lag_count: int
    included_series: tuple[str, ...]

    def __post_init__(self):
        if self.X.shape[0] != self.y_true.shape[0]:
            raise ValueError("X and y_true row counts differ")
        if self.X.shape[1] != self.lag_count * len(self.included_series):
            raise ValueError("column count does not match lags x series")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class SplitSpec:
    """Time-ordered train/test split: train first, then a discarded gap.

    The gap is carved out of the test side, so train keeps its full
    ``train_fraction`` share. ``gap=None`` means "use the lag count".
    """

    train_fraction: float = 0.7
    gap: int | None = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.gap is not None and self.gap < 0:
            raise ValueError("gap must be nonnegative")

    def resolve_gap(self, lag_count: int) -> int:
        return lag_count if self.gap is None else self.gap


def build_lag_design(
    panel: TimeSeriesPanel,
    target: str,
    excluded: set[str] | frozenset[str] = frozenset(),
    lag_count: int = 1,
) -> LagDesign:
    """Build the lag matrix for predicting ``target`` one step ahead.

    With an empty ``excluded`` set every series contributes lags (the
    unrestricted design); excluding the candidate source series yields the
    restricted design. The target's own lags are always kept -- ``target``
    may not appear in ``excluded``.

    Args:
        panel: source panel of length N + lag_count.
        target: series whose next value is predicted.
        excluded: series whose lags are dropped from the design.
        lag_count: number of lags per included series (>= 1).

    Returns:
        LagDesign with N = panel length - lag_count rows.
    """
    if lag_count < 1:
        raise ValueError("lag_count must be >= 1")
    if panel.n_rows <= lag_count:
        raise ValueError(
            f"panel length {panel.n_rows} does not exceed lag_count {lag_count}"
        )
    panel.index_of(target)
    for name in excluded:
        panel.index_of(name)
    if target in excluded:
        raise ValueError("target series cannot be excluded from its own design")

    included = tuple(n for n in panel.names if n not in excluded)
    n_rows = panel.n_rows - lag_count
    blocks = []
    for name in included:
        col = panel.column(name)
        # lag l of row t is panel value at time t + lag_count - l; lag-1 first
        lags = [col[lag_count - l : lag_count - l + n_rows] for l in range(1, lag_count + 1)]
        blocks.append(np.column_stack(lags))
    X = np.hstack(blocks)
    y_true = panel.column(target)[lag_count:].copy()
    return LagDesign(X=X, y_true=y_true, lag_count=lag_count, included_series=included)


def split_train_test(design: LagDesign, spec: SplitSpec) -> tuple[LagDesign, LagDesign]:
    """Split a design into a leading train block and a trailing test block.

    Train takes the first floor(train_fraction * N) rows, then ``gap`` rows
    are discarded, and the remainder is the test block. Raises when either
    side ends up empty.
    """
    n = design.n_rows
    gap = spec.resolve_gap(design.lag_count)
    n_train = int(np.floor(spec.train_fraction * n))
    test_start = n_train + gap
    if n_train < 1:
        raise ValueError(f"empty train split for {n} rows")
    if test_start >= n:
        raise ValueError(
            f"empty test split: {n} rows, train {n_train}, gap {gap}"
        )

    def take(rows: slice) -> LagDesign:
        return LagDesign(
            X=design.X[rows],
            y_true=design.y_true[rows],
            lag_count=design.lag_count,
            included_series=design.included_series,
        )

    return take(slice(0, n_train)), take(slice(test_start, n))


def quantile_transform(
    series: np.ndarray,
    n_quantiles: int = 1000,
    fit_range: slice | None = None,
) -> np.ndarray:
    """Map a series onto [0, 1] via the empirical CDF of a fitted window.

    The quantile grid is estimated from ``series[fit_range]`` only (the whole
    series when ``fit_range`` is None) and then applied everywhere: fitted
    values land on their empirical CDF position, values outside the fitted
    range are interpolated on the grid and clipped to [0, 1].

    A constant fitted window has a zero-width grid; the transform then maps
    everything to 0.5 and emits a warning.

    Args:
        series: 1-D input.
        n_quantiles: grid size, >= 2; capped at the fitted sample count.
        fit_range: slice of rows used to fit the grid.

    Returns:
        Transformed copy of ``series``, same length, values in [0, 1].
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be 1-D")
    fit_values = series if fit_range is None else series[fit_range]
    if fit_values.size == 0:
        raise ValueError("empty fit range")
    if n_quantiles < 2:
        raise ValueError("n_quantiles must be >= 2")

    n_q = min(n_quantiles, fit_values.size)
    if fit_values.max() == fit_values.min():
        warnings.warn(
            "constant series within the fitted range; mapping everything to 0.5",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.full_like(series, 0.5)

    probs = np.linspace(0.0, 1.0, n_q)
    grid = np.quantile(fit_values, probs)
    # Average of forward and reverse interpolation so exact ties land on the
    # centre of their CDF jump; plain interp would pick the jump's upper edge.
    forward = np.interp(series, grid, probs)
    backward = np.interp(-series, -grid[::-1], -probs[::-1])
    out = 0.5 * (forward - backward)
    return np.clip(out, 0.0, 1.0)


def quantile_transform_panel(
    panel: TimeSeriesPanel,
    n_quantiles: int = 1000,
    fit_rows: int | None = None,
) -> TimeSeriesPanel:
    """Quantile-transform every series in a panel.

    ``fit_rows`` restricts the grid fit to the first ``fit_rows`` panel rows
    (the training window); the transform is still applied to all rows.
    """
    fit_range = None if fit_rows is None else slice(0, fit_rows)
    cols = [
        quantile_transform(panel.values[:, j], n_quantiles, fit_range)
        for j in range(panel.n_series)
    ]
    return TimeSeriesPanel(values=np.column_stack(cols), names=panel.names)


def read_panel_csv(path) -> TimeSeriesPanel:
    """Read a panel from CSV: header row of names, then one row per time point."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty file")
        names = [h.strip() for h in header.split(",")]
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise ValueError(
                    f"{path}: row {lineno} has {len(parts)} cells, expected {len(names)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(f"{path}: row {lineno} has a non-numeric cell") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return TimeSeriesPanel(values=np.array(rows, dtype=float), names=tuple(names))


def write_panel_csv(panel: TimeSeriesPanel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(panel.names) + "\n")
        for row in panel.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
