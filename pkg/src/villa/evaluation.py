"""Scoring, aggregation, significance testing, and hyperparameter sweeps.

Extraction runs are scored at three levels per (method, protein,
iteration): mutations against the full truth set ("overall"), mutations
against only the truth attributed to publications present in the retrieved
context ("wrt_context"), and the retrieved publication ids against the
relevant-publication list ("context"). Aggregates are the mean and
population standard deviation over the protein x iteration grid.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import GroundTruthDataset, Publication
from .embedding import EmbedderBase, ROLE_DOCUMENT, ROLE_QUERY
from .manifest import RunManifest
from .mutation import Mutation
from .pipeline import ExtractionResult, PromptTemplate, RetrievalConfig, villa
from .vectorstore import VectorStore, cosine_distance

logger = logging.getLogger(__name__)

SCOPES = ("overall", "wrt_context", "context")

# Exact enumeration is C(na+nb, na) subsets; 8+8 keeps it at 12,870.
_EXACT_LIMIT = 8


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Metrics":
        """Apply the zero-denominator convention.

        Undefined ratios score 0, except the fully vacuous case (nothing
        retrieved and nothing to retrieve), which scores 1 across the board.
        """
        if tp == 0 and fp == 0 and fn == 0:
            return cls(tp=0, fp=0, fn=0, precision=1.0, recall=1.0, f1=1.0)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def set_metrics(retrieved: set, truth: set) -> Metrics:
    """Precision/recall/F1 of one set against another by canonical keys."""
    retrieved = set(retrieved)
    truth = set(truth)
    return Metrics.from_counts(
        tp=len(retrieved & truth),
        fp=len(retrieved - truth),
        fn=len(truth - retrieved),
    )


def context_metrics(result: ExtractionResult, gt_pub_ids: set[str]) -> Metrics:
    """Score the retrieved publication ids against the relevant ones."""
    return set_metrics(result.context_pub_ids, gt_pub_ids)


def context_restricted_truth(gt: GroundTruthDataset, protein: str, pub_ids: set[str]) -> set[Mutation]:
    """Truth mutations attributed to any of the given publications.

    Always a subset of the protein's overall truth set.
    """
    restricted: set[Mutation] = set()
    for mutation, supporting in gt.attributions.get(protein, {}).items():
        if supporting & set(pub_ids):
            restricted.add(mutation)
    return restricted


@dataclass(frozen=True)
class RunScores:
    overall: Metrics
    wrt_context: Metrics
    context: Metrics

    def by_scope(self) -> dict[str, Metrics]:
        return {"overall": self.overall, "wrt_context": self.wrt_context, "context": self.context}


def score_run(result: ExtractionResult, gt: GroundTruthDataset, protein: str) -> RunScores:
    """Score one extraction result at all three levels.

    Raises:
        EvaluationError: the protein has no ground truth.
    """
    if protein not in gt.attributions:
        raise EvaluationError(f"protein {protein!r} not present in the ground truth")
    truth, relevant_pubs = gt.for_protein(protein)
    restricted = context_restricted_truth(gt, protein, result.context_pub_ids)
    return RunScores(
        overall=set_metrics(result.mutations, truth),
        wrt_context=set_metrics(result.mutations, restricted),
        context=context_metrics(result, relevant_pubs),
    )


@dataclass(frozen=True)
class AggregateStats:
    n: int
    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    f1_mean: float
    f1_std: float


def _mean_std(values: Sequence[float], ddof: int) -> tuple[float, float]:
    # fsum keeps aggregation exactly permutation-invariant
    n = len(values)
    mean = math.fsum(values) / n
    if n - ddof <= 0:
        return mean, 0.0
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - ddof)
    return mean, math.sqrt(variance)


def aggregate(cells: Iterable[Metrics], ddof: int = 0) -> AggregateStats:
    """Mean and standard deviation of a group of metric cells.

    The default ddof=0 is the population standard deviation: the cells are
    a complete protein x iteration grid, not a sample from one.
    """
    cells = list(cells)
    if not cells:
        raise EvaluationError("cannot aggregate zero cells")
    p_mean, p_std = _mean_std([c.precision for c in cells], ddof)
    r_mean, r_std = _mean_std([c.recall for c in cells], ddof)
    f_mean, f_std = _mean_std([c.f1 for c in cells], ddof)
    return AggregateStats(
        n=len(cells),
        precision_mean=p_mean,
        precision_std=p_std,
        recall_mean=r_mean,
        recall_std=r_std,
        f1_mean=f_mean,
        f1_std=f_std,
    )


@dataclass(frozen=True)
class ResultRow:
    """One long-form row: a metric scope of one (method, protein, iteration) cell."""

    method: str
    protein: str
    iteration: int
    scope: str
    metrics: Metrics


def manifest_rows(manifest: RunManifest, gt: GroundTruthDataset) -> list[ResultRow]:
    """Score every record of a manifest into long-form rows."""
    rows: list[ResultRow] = []
    for record in manifest.records:
        scores = score_run(record.result, gt, record.protein)
        for scope, metrics in scores.by_scope().items():
            rows.append(
                ResultRow(
                    method=manifest.method,
                    protein=record.protein,
                    iteration=record.iteration,
                    scope=scope,
                    metrics=metrics,
                )
            )
    return rows


def summarize(rows: Iterable[ResultRow], ddof: int = 0) -> dict[str, dict[str, AggregateStats]]:
    """Aggregate long-form rows into method -> scope -> stats."""
    grouped: dict[str, dict[str, list[Metrics]]] = {}
    for row in rows:
        grouped.setdefault(row.method, {}).setdefault(row.scope, []).append(row.metrics)
    return {
        method: {scope: aggregate(cells, ddof=ddof) for scope, cells in scopes.items()}
        for method, scopes in grouped.items()
    }


RESULTS_CSV_HEADER = [
    "method",
    "protein",
    "iteration",
    "metric_scope",
    "precision",
    "recall",
    "f1",
    "tp",
    "fp",
    "fn",
]


def write_results_csv(rows: Iterable[ResultRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(RESULTS_CSV_HEADER)
        for row in rows:
            m = row.metrics
            writer.writerow(
                [
                    row.method,
                    row.protein,
                    row.iteration,
                    row.scope,
                    f"{m.precision:.6f}",
                    f"{m.recall:.6f}",
                    f"{m.f1:.6f}",
                    m.tp,
                    m.fp,
                    m.fn,
                ]
            )


def summary_payload(
    summaries: dict[str, dict[str, AggregateStats]],
    responders: Mapping[str, str],
    datastores: Mapping[str, str],
) -> list[dict]:
    """JSON-ready summary: one object per method with mean/std triples per scope."""
    payload = []
    for method in sorted(summaries):
        entry = {
            "method": method,
            "responder": responders.get(method, ""),
            "datastore": datastores.get(method, ""),
            "scopes": {},
        }
        for scope in sorted(summaries[method]):
            stats = summaries[method][scope]
            entry["scopes"][scope] = {
                "n": stats.n,
                "precision": {"mean": stats.precision_mean, "std": stats.precision_std},
                "recall": {"mean": stats.recall_mean, "std": stats.recall_std},
                "f1": {"mean": stats.f1_mean, "std": stats.f1_std},
            }
        payload.append(entry)
    return payload


def write_summary_json(payload, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as out:
        json.dump(payload, out, indent=2, sort_keys=True)
        out.write("\n")


# -- Mann-Whitney U ------------------------------------------------------


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        midrank = (i + j + 2) / 2  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = midrank
        i = j + 1
    return ranks


def _exact_p_two_sided(u_a: float, na: int, nb: int) -> float:
    """Enumerate all C(na+nb, na) rank assignments; double the smaller tail."""
    n = na + nb
    offset = na * (na + 1) / 2
    counts: dict[float, int] = {}
    total = 0
    for positions in combinations(range(1, n + 1), na):
        u = sum(positions) - offset
        counts[u] = counts.get(u, 0) + 1
        total += 1
    p_le = sum(c for u, c in counts.items() if u <= u_a) / total
    p_ge = sum(c for u, c in counts.items() if u >= u_a) / total
    return min(1.0, 2.0 * min(p_le, p_ge))


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Mann-Whitney U (of the first sample) and two-sided p-value.

    Ranks use midranks for ties. For samples of size at most 8 with no
    ties, the p-value is exact by enumeration of rank assignments; larger
    or tied samples use the normal approximation with tie and continuity
    corrections. Two identical samples (or any fully degenerate data)
    yield p = 1.
    """
    if not a or not b:
        raise EvaluationError("both samples must be non-empty")
    na, nb = len(a), len(b)
    combined = list(a) + list(b)
    ranks = _midranks(combined)
    rank_sum_a = sum(ranks[:na])
    u_a = rank_sum_a - na * (na + 1) / 2

    has_ties = len(set(combined)) < len(combined)
    if not has_ties and na <= _EXACT_LIMIT and nb <= _EXACT_LIMIT:
        return u_a, _exact_p_two_sided(u_a, na, nb)

    n = na + nb
    mean_u = na * nb / 2
    tie_counts: dict[float, int] = {}
    for value in combined:
        tie_counts[value] = tie_counts.get(value, 0) + 1
    tie_term = sum(t**3 - t for t in tie_counts.values())
    variance = na * nb / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return u_a, 1.0
    z = max(0.0, abs(u_a - mean_u) - 0.5) / math.sqrt(variance)
    p = math.erfc(z / math.sqrt(2))
    return u_a, min(1.0, p)


# -- distance-distribution analysis --------------------------------------


@dataclass(frozen=True)
class ProteinDistanceResult:
    protein: str
    relevant: tuple[float, ...]
    non_relevant: tuple[float, ...]
    u: float
    p: float


def abstract_distance_analysis(
    embedder: EmbedderBase,
    gt: GroundTruthDataset,
    corpus: Sequence[Publication],
    prompts: Mapping[str, str],
) -> tuple[list[ProteinDistanceResult], list[str]]:
    """Compare prompt-to-abstract distances for relevant vs non-relevant abstracts.

    For each protein with a prompt, computes cosine distances from the
    prompt embedding to the abstracts of its relevant publications and to
    all remaining abstracts, then runs the Mann-Whitney U test on the two
    samples. Proteins with no relevant abstracts in the corpus are skipped
    with a warning.
    """
    abstract_vectors = dict(
        zip(
            (pub.pub_id for pub in corpus),
            embedder.embed_batch([pub.abstract for pub in corpus], role=ROLE_DOCUMENT),
        )
    )
    results: list[ProteinDistanceResult] = []
    warnings: list[str] = []
    for protein, prompt in prompts.items():
        relevant_ids = gt.pub_ids_for(protein) & set(abstract_vectors)
        if not relevant_ids:
            message = f"protein {protein}: no relevant abstracts in the corpus; skipped"
            warnings.append(message)
            logger.warning(message)
            continue
        query_vector = embedder.embed(prompt, role=ROLE_QUERY)
        relevant = []
        non_relevant = []
        for pub_id, vector in abstract_vectors.items():
            distance = cosine_distance(query_vector, vector)
            (relevant if pub_id in relevant_ids else non_relevant).append(distance)
        if not non_relevant:
            message = f"protein {protein}: every abstract is relevant; skipped"
            warnings.append(message)
            logger.warning(message)
            continue
        u, p = mann_whitney_u(relevant, non_relevant)
        results.append(
            ProteinDistanceResult(
                protein=protein,
                relevant=tuple(relevant),
                non_relevant=tuple(non_relevant),
                u=u,
                p=p,
            )
        )
    return results, warnings


def write_distance_csv(results: Iterable[ProteinDistanceResult], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(["protein", "group", "distance", "u", "p", "n_relevant", "n_non_relevant"])
        for result in results:
            meta = [result.u, result.p, len(result.relevant), len(result.non_relevant)]
            for value in result.relevant:
                writer.writerow([result.protein, "relevant", f"{value:.9f}", *meta])
            for value in result.non_relevant:
                writer.writerow([result.protein, "non_relevant", f"{value:.9f}", *meta])


# -- hyperparameter sweep -------------------------------------------------


@dataclass
class SweepCell:
    k_a: int
    k_c: int
    rows: list[ResultRow] = field(default_factory=list)
    summary: dict[str, dict[str, AggregateStats]] = field(default_factory=dict)
    error: str | None = None


def sweep(
    embedder: EmbedderBase,
    responder,
    store_abstracts: VectorStore,
    store_fulltext: VectorStore,
    gt: GroundTruthDataset,
    template: PromptTemplate,
    virus: str,
    base_cfg: RetrievalConfig,
    k_a_values: Sequence[int],
    k_c_values: Sequence[int],
    proteins: Sequence[str] | None = None,
    iterations: int = 1,
) -> list[SweepCell]:
    """Run the two-stage method over a (k_a, k_c) grid and score each cell.

    A failing cell records its error and the sweep continues.
    """
    if not k_a_values or not k_c_values:
        raise EvaluationError("sweep grid must be non-empty")
    proteins = list(proteins) if proteins is not None else gt.proteins
    cells: list[SweepCell] = []
    for k_a in k_a_values:
        for k_c in k_c_values:
            cell = SweepCell(k_a=k_a, k_c=k_c)
            cfg = replace(base_cfg, k_a=k_a, k_c=k_c)
            try:
                for protein in proteins:
                    for iteration in range(1, iterations + 1):
                        result = villa(
                            embedder, responder, store_abstracts, store_fulltext,
                            cfg, template, virus, protein,
                        )
                        scores = score_run(result, gt, protein)
                        for scope, metrics in scores.by_scope().items():
                            cell.rows.append(
                                ResultRow(
                                    method="villa",
                                    protein=protein,
                                    iteration=iteration,
                                    scope=scope,
                                    metrics=metrics,
                                )
                            )
                cell.summary = summarize(cell.rows)
            except Exception as exc:  # keep sweeping; the cell records its failure
                cell.error = str(exc)
                logger.warning("sweep cell k_a=%d k_c=%d failed: %s", k_a, k_c, exc)
            cells.append(cell)
    return cells


SWEEP_CSV_HEADER = ["k_a", "k_c", *RESULTS_CSV_HEADER]


def write_sweep_csv(cells: Iterable[SweepCell], path) -> None:
    """Long-form sweep CSV for plotting; failed cells contribute no rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(SWEEP_CSV_HEADER)
        for cell in cells:
            for row in cell.rows:
                m = row.metrics
                writer.writerow(
                    [
                        cell.k_a,
                        cell.k_c,
                        row.method,
                        row.protein,
                        row.iteration,
                        row.scope,
                        f"{m.precision:.6f}",
                        f"{m.recall:.6f}",
                        f"{m.f1:.6f}",
                        m.tp,
                        m.fp,
                        m.fn,
                    ]
                )
