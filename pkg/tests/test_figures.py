from __future__ import annotations

from villa.evaluation import (
    AggregateStats,
    ProteinDistanceResult,
    SweepCell,
)
from villa.figures import save_distance_figure, save_metrics_figure, save_sweep_figure


def _stats(value=0.5):
    return AggregateStats(
        n=3,
        precision_mean=value, precision_std=0.1,
        recall_mean=value, recall_std=0.1,
        f1_mean=value, f1_std=0.1,
    )


def test_metrics_figure_written(tmp_path):
    summaries = {
        "villa": {"overall": _stats(0.9), "wrt_context": _stats(0.95), "context": _stats(0.4)},
        "rag-abstracts": {"overall": _stats(0.2), "context": _stats(0.3)},
    }
    path = save_metrics_figure(summaries, tmp_path / "metrics.png")
    assert path.stat().st_size > 0


def test_sweep_figure_written(tmp_path):
    cells = [
        SweepCell(k_a=k_a, k_c=k_c, summary={"villa": {"overall": _stats(k_a / 10)}})
        for k_a in (1, 2, 4)
        for k_c in (2, 4)
    ]
    cells.append(SweepCell(k_a=8, k_c=2, error="boom"))
    path = save_sweep_figure(cells, tmp_path / "sweep.png")
    assert path.stat().st_size > 0


def test_distance_figure_written(tmp_path):
    results = [
        ProteinDistanceResult(
            protein=p, relevant=(0.2, 0.3), non_relevant=(0.5, 0.6, 0.7), u=1.0, p=0.2
        )
        for p in ("PB2", "NA")
    ]
    path = save_distance_figure(results, tmp_path / "distances.png")
    assert path.stat().st_size > 0


def test_distance_figure_handles_empty(tmp_path):
    path = save_distance_figure([], tmp_path / "empty.png")
    assert path.stat().st_size > 0
