"""Figure rendering for the report path of the CLI.

Every report command writes its delimited output first and then renders a
matplotlib figure next to it. Rendering is headless (Agg backend).
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import AggregateStats, ProteinDistanceResult, SweepCell

_SCOPE_LABELS = {
    "overall": "vs full truth",
    "wrt_context": "vs truth in context",
    "context": "retrieved publications",
}


def save_metrics_figure(summaries: Mapping[str, Mapping[str, AggregateStats]], path) -> Path:
    """Grouped bar chart of mean F1/precision/recall (with std error bars)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    methods = sorted(summaries)
    scopes = [s for s in ("overall", "wrt_context", "context") if any(s in summaries[m] for m in methods)]
    fig, axes = plt.subplots(1, 3, figsize=(12, 4), sharey=True)
    for ax, metric in zip(axes, ("f1", "precision", "recall")):
        width = 0.8 / max(1, len(scopes))
        for si, scope in enumerate(scopes):
            means, stds, positions = [], [], []
            for mi, method in enumerate(methods):
                stats = summaries[method].get(scope)
                if stats is None:
                    continue
                means.append(getattr(stats, f"{metric}_mean"))
                stds.append(getattr(stats, f"{metric}_std"))
                positions.append(mi + si * width)
            ax.bar(positions, means, width=width, yerr=stds, capsize=3,
                   label=_SCOPE_LABELS.get(scope, scope))
        ax.set_title(metric)
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(methods))])
        ax.set_xticklabels(methods, rotation=20, ha="right")
        ax.set_ylim(0, 1.05)
    axes[0].set_ylabel("score")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _cell_stat(cell: SweepCell, scope: str, metric: str) -> float | None:
    stats = cell.summary.get("villa", {}).get(scope)
    if stats is None:
        return None
    return getattr(stats, f"{metric}_mean")


def save_sweep_figure(cells: Sequence[SweepCell], path) -> Path:
    """Mean scores vs k_a (one line per k_c) for the mutation-level scope."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ok = [c for c in cells if c.error is None and c.summary]
    fig, axes = plt.subplots(1, 3, figsize=(12, 4), sharey=True)
    k_c_values = sorted({c.k_c for c in ok})
    for ax, metric in zip(axes, ("f1", "precision", "recall")):
        for k_c in k_c_values:
            line = sorted((c.k_a, _cell_stat(c, "overall", metric)) for c in ok if c.k_c == k_c)
            xs = [x for x, y in line if y is not None]
            ys = [y for _, y in line if y is not None]
            ax.plot(xs, ys, marker="o", label=f"k_c={k_c}")
        ax.set_title(f"mean {metric}")
        ax.set_xlabel("k_a")
        ax.set_ylim(0, 1.05)
    axes[0].set_ylabel("score")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_distance_figure(results: Iterable[ProteinDistanceResult], path) -> Path:
    """Per-protein box plots of prompt-to-abstract distances, relevant vs not."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results = list(results)
    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(results)), 4))
    data, positions, labels = [], [], []
    for i, result in enumerate(results):
        data.extend([list(result.relevant), list(result.non_relevant)])
        positions.extend([3 * i, 3 * i + 1])
        labels.append(f"{result.protein}\np={result.p:.3g}")
    if data:
        boxes = ax.boxplot(data, positions=positions, widths=0.8, patch_artist=True)
        for i, patch in enumerate(boxes["boxes"]):
            patch.set_facecolor("#4c72b0" if i % 2 == 0 else "#dd8452")
        ax.set_xticks([3 * i + 0.5 for i in range(len(results))])
        ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("cosine distance to prompt")
    ax.plot([], [], color="#4c72b0", label="relevant")
    ax.plot([], [], color="#dd8452", label="non-relevant")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
