"""Boxplot figures for benchmark metric distributions.

Renders one figure per metric from per-set benchmark results: networks along
the x axis, one box per time-series length within each network group. Boxes
span the quartiles, whiskers the full range, and the median is drawn as a
black square, so the figures read the same way as the delimited summaries.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import ExperimentResult

_METRIC_LABELS = {
    "auc": "AUC",
    "brier": "Brier score",
    "acc_at_p05": "Accuracy at p < 0.05",
    "bal_acc_at_p05": "Balanced accuracy at p < 0.05",
    "acc_at_gmean": "Accuracy at G-mean-optimal threshold",
    "bal_acc_at_gmean": "Balanced accuracy at G-mean-optimal threshold",
}


def render_metric_boxplots(result: ExperimentResult, out_dir) -> list[Path]:
    """Write one PNG per metric; returns the created paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # values[(network, length)][metric] -> list over sets
    values: dict[tuple[str, int], dict[str, list[float]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for r in result.set_results:
        if r.report is None:
            continue
        for metric, value in r.report.to_dict().items():
            values[(r.network, r.length)][metric].append(value)
    if not values:
        return []

    networks = list(dict.fromkeys(k[0] for k in values))
    lengths = sorted({k[1] for k in values})
    paths = []
    n_slots = len(networks) * len(lengths) + len(networks)
    for metric, label in _METRIC_LABELS.items():
        fig, ax = plt.subplots(figsize=(max(4.5, 1.5 + 0.55 * n_slots), 4.0))
        data, positions, ticks = [], [], []
        pos = 0.0
        for network in networks:
            group_start = pos
            for length in lengths:
                series = values.get((network, length), {}).get(metric)
                if series:
                    data.append(series)
                    positions.append(pos)
                pos += 1.0
            ticks.append((group_start + pos - 1.0) / 2.0)
            pos += 0.8
        if not data:
            plt.close(fig)
            continue
        ax.boxplot(data, positions=positions, whis=(0, 100), widths=0.7, showfliers=False)
        ax.plot(
            positions,
            [float(np.median(d)) for d in data],
            "ks",
            markersize=5,
            linestyle="none",
            zorder=3,
        )
        ax.set_xticks(ticks)
        ax.set_xticklabels(networks)
        ax.set_ylabel(label)
        ax.set_title(f"{label} by network ({', '.join(str(l) for l in lengths)} points)")
        fig.tight_layout()
        path = out / f"{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
