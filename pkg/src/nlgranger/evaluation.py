"""Scoring of recovered p-value matrices against ground-truth adjacency.

Edges are scored as a binary classification problem over all off-diagonal
ordered pairs: smaller p-values mean stronger edge evidence, and the
implied edge probability for calibration metrics is 1 - p.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .engine import PValueMatrix
from .simnet import GroundTruth

DEFAULT_P_THRESHOLD = 0.05
THRESHOLD_GRID = np.round(np.arange(1, 101) / 100.0, 2)


@dataclass(frozen=True)
class EdgeScores:
    """Aligned truth labels and p-values over all off-diagonal pairs."""

    labels: np.ndarray
    pvalues: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=bool)
        pvalues = np.asarray(self.pvalues, dtype=float)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "pvalues", pvalues)
        if labels.shape != pvalues.shape or labels.ndim != 1:
            raise ValueError("labels and pvalues must be 1-D and aligned")
        if labels.size == 0:
            raise ValueError("no edge scores")
        if np.isnan(pvalues).any():
            raise ValueError("p-values contain NaN (failed pairwise tests?)")
        if pvalues.min() < 0 or pvalues.max() > 1:
            raise ValueError("p-values outside [0, 1]")


@dataclass(frozen=True)
class ThresholdMetrics:
    accuracy: float
    balanced_accuracy: float
    gmean: float


@dataclass(frozen=True)
class NetworkEvalReport:
    """The full metric set for one recovered network."""

    auc: float
    brier: float
    acc_at_p05: float
    bal_acc_at_p05: float
    gmean_threshold: float
    acc_at_gmean: float
    bal_acc_at_gmean: float

    def to_dict(self) -> dict[str, float]:
        return {
            "auc": self.auc,
            "brier": self.brier,
            "acc_at_p05": self.acc_at_p05,
            "bal_acc_at_p05": self.bal_acc_at_p05,
            "gmean_threshold": self.gmean_threshold,
            "acc_at_gmean": self.acc_at_gmean,
            "bal_acc_at_gmean": self.bal_acc_at_gmean,
        }


def edge_scores(matrix: PValueMatrix, truth: GroundTruth) -> EdgeScores:
    """Flatten matrix and truth into aligned per-pair vectors, by node name."""
    if set(matrix.names) != set(truth.names):
        missing = set(matrix.names) ^ set(truth.names)
        raise ValueError(f"node sets differ between matrix and truth: {sorted(missing)}")
    order = [truth.names.index(n) for n in matrix.names]
    adjacency = truth.adjacency[np.ix_(order, order)]
    count = len(matrix.names)
    off_diag = ~np.eye(count, dtype=bool)
    return EdgeScores(labels=adjacency[off_diag], pvalues=matrix.values[off_diag])


def auc(scores: EdgeScores) -> float:
    """Rank-based area under the ROC curve; ties contribute one half."""
    n_pos = int(scores.labels.sum())
    n_neg = scores.labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both edge and non-edge examples")
    ranks = scipy.stats.rankdata(1.0 - scores.pvalues)
    rank_sum = float(ranks[scores.labels].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def brier(scores: EdgeScores) -> float:
    """Mean squared gap between implied edge probability 1 - p and the label."""
    prob = 1.0 - scores.pvalues
    return float(np.mean((prob - scores.labels) ** 2))


def threshold_metrics(
    scores: EdgeScores, p_threshold: float, warn_empty: bool = True
) -> ThresholdMetrics:
    """Confusion metrics when an edge is declared iff p < threshold.

    Sensitivity or specificity over an empty class is defined as 0; that
    only happens when the labels are single-class, and it is flagged.
    """
    if not 0.0 <= p_threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    predicted = scores.pvalues < p_threshold
    labels = scores.labels
    tp = int(np.sum(predicted & labels))
    tn = int(np.sum(~predicted & ~labels))
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if (n_pos == 0 or n_neg == 0) and warn_empty:
        warnings.warn("single-class labels: the empty class scores 0", RuntimeWarning)
    sensitivity = tp / n_pos if n_pos else 0.0
    specificity = tn / n_neg if n_neg else 0.0
    accuracy = (tp + tn) / labels.size
    return ThresholdMetrics(
        accuracy=float(accuracy),
        balanced_accuracy=float((sensitivity + specificity) / 2.0),
        gmean=float(np.sqrt(sensitivity * specificity)),
    )


def gmean_optimal_threshold(score_sets: list[EdgeScores]) -> float:
    """Grid threshold maximizing the median G-mean across independent sets.

    The grid is the 100 points 0.01..1.00; ties break toward the smaller
    threshold.
    """
    if not score_sets:
        raise ValueError("at least one score set is required")
    medians = np.empty(THRESHOLD_GRID.size)
    for k, threshold in enumerate(THRESHOLD_GRID):
        gmeans = [
            threshold_metrics(s, threshold, warn_empty=False).gmean for s in score_sets
        ]
        medians[k] = np.median(gmeans)
    return float(THRESHOLD_GRID[int(np.argmax(medians))])


def evaluate_scores(
    scores: EdgeScores,
    gmean_threshold: float | None = None,
    p_threshold: float = DEFAULT_P_THRESHOLD,
) -> NetworkEvalReport:
    """Assemble the full report for one score set.

    ``gmean_threshold`` is normally chosen across many independent sets;
    when omitted it is optimized on this single set.
    """
    if gmean_threshold is None:
        gmean_threshold = gmean_optimal_threshold([scores])
    at_p = threshold_metrics(scores, p_threshold)
    at_g = threshold_metrics(scores, gmean_threshold)
    return NetworkEvalReport(
        auc=auc(scores),
        brier=brier(scores),
        acc_at_p05=at_p.accuracy,
        bal_acc_at_p05=at_p.balanced_accuracy,
        gmean_threshold=gmean_threshold,
        acc_at_gmean=at_g.accuracy,
        bal_acc_at_gmean=at_g.balanced_accuracy,
    )
