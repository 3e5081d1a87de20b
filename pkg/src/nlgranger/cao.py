"""Minimum embedding dimension via nearest-neighbor distance ratios.

For each candidate dimension d the series is delay-embedded (delay 1), each
point's nearest neighbor is found under the Chebyshev norm, and the ratio of
the (d+1)- to d-dimensional distances for those pairs is averaged into E(d).
The quantity E1(d) = E(d+1)/E(d) settles near 1 once d suffices to unfold
the dynamics; the reported dimension is the smallest d where |E1(d) - 1|
drops below a plateau tolerance.

E2(d), the analogous ratio of one-step-ahead prediction distances, is
computed alongside as a diagnostic (values far from 1 hint at determinism)
but plays no part in the dimension choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .panel import TimeSeriesPanel

PLATEAU_TOL = 0.05
_NEIGHBOR_CANDIDATES = 8


@dataclass(frozen=True)
class CaoAnalysis:
    """E1/E2 curves for d = 1..d_max and the selected dimension."""

    dimension: int
    e1: np.ndarray
    e2: np.ndarray


def _embed(series: np.ndarray, dim: int, n_points: int) -> np.ndarray:
    # rows i = (x[i], ..., x[i+dim-1]); restricted to the first n_points rows
    return np.lib.stride_tricks.sliding_window_view(series, dim)[:n_points]


def _mean_distance_ratios(series: np.ndarray, dim: int) -> tuple[float, float]:
    """E(dim) and E*(dim): neighbor ratios between dim and dim+1 embeddings."""
    n_points = series.size - dim  # rows whose (dim+1)-embedding also exists
    base = _embed(series, dim, n_points)
    extended = _embed(series, dim + 1, n_points)

    tree = cKDTree(base)
    k = min(n_points, _NEIGHBOR_CANDIDATES)
    dists, idx = tree.query(base, k=k, p=np.inf)
    dists, idx = np.atleast_2d(dists), np.atleast_2d(idx)

    ratios = []
    steps = []
    for i in range(n_points):
        neighbor = -1
        base_dist = 0.0
        for j in range(1, k):  # column 0 is the point itself
            if dists[i, j] > 0.0:
                neighbor = idx[i, j]
                base_dist = dists[i, j]
                break
        if neighbor < 0:
            continue  # duplicated point beyond the candidate list; skip it
        ext_dist = np.max(np.abs(extended[i] - extended[neighbor]))
        ratios.append(ext_dist / base_dist)
        steps.append(abs(series[i + dim] - series[neighbor + dim]))
    if not ratios:
        return np.nan, np.nan
    return float(np.mean(ratios)), float(np.mean(steps))


def minimum_embedding_dimension(
    series: np.ndarray,
    d_max: int = 10,
    tol: float = PLATEAU_TOL,
) -> CaoAnalysis:
    """Smallest embedding dimension at which E1 plateaus near 1.

    Args:
        series: 1-D observations, length at least d_max + 3.
        d_max: largest dimension probed; also the fallback when no plateau
            is reached.
        tol: plateau threshold on |E1(d) - 1|.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be 1-D")
    if d_max < 2:
        raise ValueError("d_max must be >= 2")
    if series.size < d_max + 3:
        raise ValueError(
            f"series of length {series.size} too short to embed at d_max={d_max}"
        )

    nan_curve = np.full(d_max, np.nan)
    if np.ptp(series) == 0.0:
        return CaoAnalysis(dimension=1, e1=nan_curve, e2=nan_curve)

    e = np.empty(d_max + 1)
    e_star = np.empty(d_max + 1)
    for d in range(1, d_max + 2):
        e[d - 1], e_star[d - 1] = _mean_distance_ratios(series, d)

    with np.errstate(invalid="ignore", divide="ignore"):
        e1 = e[1:] / e[:-1]
        e2 = e_star[1:] / e_star[:-1]

    dimension = d_max
    for d in range(1, d_max + 1):
        if np.isfinite(e1[d - 1]) and abs(e1[d - 1] - 1.0) < tol:
            dimension = d
            break
    return CaoAnalysis(dimension=dimension, e1=e1, e2=e2)


def select_lag_cao(
    panel: TimeSeriesPanel,
    d_max: int = 10,
    tol: float = PLATEAU_TOL,
) -> int:
    """Lag order for a panel: the largest per-series minimum embedding dimension."""
    dims = [
        minimum_embedding_dimension(panel.values[:, j], d_max=d_max, tol=tol).dimension
        for j in range(panel.n_series)
    ]
    return int(np.clip(max(dims), 1, d_max))
