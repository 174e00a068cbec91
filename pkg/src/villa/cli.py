"""Command-line surface: ingest, embed, run, evaluate, sweep, analyze, serve.

All commands operate inside a workspace directory laid out as::

    corpus/   corpus.jsonl, ground_truth.csv     (written by `ingest`)
    stores/   abstracts.vstore, fulltext.vstore  (written by `embed`)
    runs/     one JSON manifest per `run`
    results/  CSV + JSON + rendered figures      (written by report commands)
    review/   journal of the review service

Settings resolve as flags > config file > defaults. API keys are read only
from the environment (EMBEDDER_API_KEY, RESPONDER_API_KEY).
"""

from __future__ import annotations

import json
import os
import shutil
import sys
from dataclasses import replace
from pathlib import Path

import click

from .config import Config, ConfigError, apply_overrides, load_config
from .corpus import load_corpus, load_ground_truth
from .embedding import MockEmbedder, RemoteEmbedder
from .evaluation import (
    abstract_distance_analysis,
    manifest_rows,
    summarize,
    summary_payload,
    sweep as run_sweep,
    write_distance_csv,
    write_results_csv,
    write_summary_json,
    write_sweep_csv,
)
from .manifest import RunManifest, RunRecord, load_manifest, save_manifest, utc_now
from .pipeline import (
    METHODS,
    PromptTemplate,
    RetrievalConfig,
    build_datastores,
    default_template,
    retrieval_query,
    run_method,
)
from .responders import EmptyResponder, OracleResponder, RemoteResponder, ScriptedResponder
from .vectorstore import VectorStore


class Workspace:
    def __init__(self, root):
        self.root = Path(root)

    @property
    def corpus_path(self) -> Path:
        return self.root / "corpus" / "corpus.jsonl"

    @property
    def ground_truth_path(self) -> Path:
        return self.root / "corpus" / "ground_truth.csv"

    @property
    def abstracts_store_path(self) -> Path:
        return self.root / "stores" / "abstracts.vstore"

    @property
    def fulltext_store_path(self) -> Path:
        return self.root / "stores" / "fulltext.vstore"

    @property
    def runs_dir(self) -> Path:
        return self.root / "runs"

    @property
    def results_dir(self) -> Path:
        return self.root / "results"

    @property
    def review_dir(self) -> Path:
        return self.root / "review"


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise _fail(f"{path} does not exist; {hint}")
    return path


def _parse_kv_spec(spec: str) -> tuple[str, dict[str, str]]:
    kind, _, rest = spec.partition(":")
    options: dict[str, str] = {}
    if rest:
        for part in rest.split(","):
            key, sep, value = part.partition("=")
            options[key.strip()] = value.strip() if sep else ""
    return kind.strip(), options


def make_embedder(spec: str):
    """Build an embedder from a descriptor like ``mock:seed=7,dim=64``."""
    kind, options = _parse_kv_spec(spec)
    if kind == "mock":
        return MockEmbedder(seed=int(options.get("seed", 7)), dim=int(options.get("dim", 256)))
    if kind == "remote":
        if "model" not in options or "dim" not in options:
            raise _fail("remote embedder needs model=... and dim=... (e.g. remote:model=m,dim=1024)")
        base_url = options.get("base_url") or os.environ.get("EMBEDDER_BASE_URL")
        if not base_url:
            raise _fail("remote embedder needs base_url=... or EMBEDDER_BASE_URL")
        return RemoteEmbedder(
            base_url=base_url,
            model=options["model"],
            dim=int(options["dim"]),
            api_key=os.environ.get("EMBEDDER_API_KEY"),
            query_model=options.get("query_model"),
            context_limit=int(options["context_limit"]) if "context_limit" in options else None,
        )
    raise _fail(f"unknown embedder kind {kind!r}; expected mock or remote")


def make_responder(spec: str, workspace: Workspace):
    """Build a responder from a descriptor like ``mock:oracle`` or ``remote:model=m``."""
    kind, options = _parse_kv_spec(spec)
    if kind == "mock":
        if "oracle" in options:
            gt_path = _require(workspace.ground_truth_path, "run `ingest` first")
            gt, _ = load_ground_truth(gt_path)
            return OracleResponder(gt)
        if "empty" in options or not options:
            return EmptyResponder()
        if "script" in options:
            script_path = Path(options["script"])
            with open(script_path, encoding="utf-8") as handle:
                script = json.load(handle)
            return ScriptedResponder(script, name=f"mock:script={script_path.name}")
        raise _fail(f"unknown mock responder options {options!r}; expected oracle, empty, or script=PATH")
    if kind == "remote":
        if "model" not in options:
            raise _fail("remote responder needs model=...")
        base_url = options.get("base_url") or os.environ.get("RESPONDER_BASE_URL")
        if not base_url:
            raise _fail("remote responder needs base_url=... or RESPONDER_BASE_URL")
        return RemoteResponder(
            base_url=base_url,
            model=options["model"],
            api_key=os.environ.get("RESPONDER_API_KEY"),
            temperature=float(options.get("temperature", 0.0)),
        )
    raise _fail(f"unknown responder kind {kind!r}; expected mock or remote")


def _load_stores(workspace: Workspace) -> tuple[VectorStore, VectorStore]:
    store_a = VectorStore.load(_require(workspace.abstracts_store_path, "run `embed` first"))
    store_f = VectorStore.load(_require(workspace.fulltext_store_path, "run `embed` first"))
    return store_a, store_f


def _retrieval_config(cfg: Config) -> RetrievalConfig:
    return RetrievalConfig(
        k_a=cfg.k_a,
        k_c=cfg.k_c,
        k=cfg.k,
        t=cfg.t,
        t_level2=cfg.t_level2,
        query_mode=cfg.query_mode,
        jobs=cfg.jobs,
    )


config_option_names = (
    "k", "t", "k_a", "k_c", "t_level2", "chunk_size", "chunk_overlap",
    "abstract_limit", "iterations", "virus", "query_mode", "jobs",
)


def _merge_config(ctx, **flags) -> Config:
    cfg: Config = ctx.obj["config"]
    try:
        return apply_overrides(replace(cfg), **{k: v for k, v in flags.items() if k in config_option_names})
    except ConfigError as exc:
        raise _fail(str(exc))


@click.group()
@click.option("--workspace", type=click.Path(path_type=Path), default=Path("."), show_default=True,
              help="Directory holding corpus/, stores/, runs/, results/.")
@click.option("--config", "config_path", type=click.Path(path_type=Path, exists=True), default=None,
              help="TOML config file; flags override it.")
@click.pass_context
def main(ctx, workspace, config_path):
    """Two-stage retrieval-augmented mutation extraction toolkit."""
    ctx.ensure_object(dict)
    try:
        ctx.obj["config"] = load_config(config_path)
    except ConfigError as exc:
        raise _fail(str(exc))
    ctx.obj["workspace"] = Workspace(workspace)


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path), required=True)
@click.option("--ground-truth", "gt_path", type=click.Path(path_type=Path), required=True)
@click.pass_context
def ingest(ctx, corpus_path, gt_path):
    """Validate corpus and ground truth and copy them into the workspace."""
    workspace: Workspace = ctx.obj["workspace"]
    try:
        corpus = load_corpus(_require(corpus_path, "pass the corpus JSONL file"))
        gt, warnings = load_ground_truth(
            _require(gt_path, "pass the ground-truth CSV file"),
            known_pub_ids={pub.pub_id for pub in corpus},
        )
    except (OSError, ValueError) as exc:
        raise _fail(str(exc))
    workspace.corpus_path.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(corpus_path, workspace.corpus_path)
    shutil.copyfile(gt_path, workspace.ground_truth_path)
    mutation_count = sum(len(gt.mutations_for(p)) for p in gt.proteins)
    click.echo(f"publications: {len(corpus)}, proteins: {len(gt.proteins)}, mutations: {mutation_count}")
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@click.option("--embedder", "embedder_spec", default="mock", show_default=True)
@click.option("--chunk-size", type=int, default=None)
@click.option("--chunk-overlap", type=int, default=None)
@click.option("--abstract-limit", type=int, default=None)
@click.pass_context
def embed(ctx, embedder_spec, chunk_size, chunk_overlap, abstract_limit):
    """Build the abstract and full-text vector stores."""
    workspace: Workspace = ctx.obj["workspace"]
    cfg = _merge_config(ctx, chunk_size=chunk_size, chunk_overlap=chunk_overlap, abstract_limit=abstract_limit)
    try:
        corpus = load_corpus(_require(workspace.corpus_path, "run `ingest` first"))
        embedder = make_embedder(embedder_spec)
        store_a, store_f, warnings = build_datastores(
            corpus, embedder,
            chunk_size=cfg.chunk_size, chunk_overlap=cfg.chunk_overlap, abstract_limit=cfg.abstract_limit,
        )
    except (OSError, ValueError) as exc:
        raise _fail(str(exc))
    workspace.abstracts_store_path.parent.mkdir(parents=True, exist_ok=True)
    store_a.save(workspace.abstracts_store_path)
    store_f.save(workspace.fulltext_store_path)
    click.echo(f"abstracts: {len(store_a)}, chunks: {len(store_f)}")
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--proteins", default=None, help="Comma-separated; defaults to every ground-truth protein.")
@click.option("--virus", default=None)
@click.option("--iterations", type=int, default=None)
@click.option("--embedder", "embedder_spec", default="mock", show_default=True)
@click.option("--responder", "responder_spec", default="mock:empty", show_default=True)
@click.option("--template", "template_path", type=click.Path(path_type=Path, exists=True), default=None,
              help="JSON prompt template {template_id, body, mode}.")
@click.option("--k", type=int, default=None)
@click.option("--t", type=float, default=None)
@click.option("--k-a", "k_a", type=int, default=None)
@click.option("--k-c", "k_c", type=int, default=None)
@click.option("--t-level2", "t_level2", type=float, default=None)
@click.option("--query-mode", "query_mode", type=click.Choice(["full_prompt", "short"]), default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--out", "out_name", default=None, help="Manifest filename under runs/ (default: <method>.json).")
@click.option("--fixed-clock", default=None, help="Timestamp override for reproducible manifests.")
@click.pass_context
def run(ctx, method, proteins, virus, iterations, embedder_spec, responder_spec,
        template_path, k, t, k_a, k_c, t_level2, query_mode, jobs, out_name, fixed_clock):
    """Run one extraction method over proteins x iterations; write a manifest."""
    workspace: Workspace = ctx.obj["workspace"]
    cfg = _merge_config(
        ctx, k=k, t=t, k_a=k_a, k_c=k_c, t_level2=t_level2,
        query_mode=query_mode, jobs=jobs, virus=virus, iterations=iterations,
    )
    try:
        gt, _ = load_ground_truth(_require(workspace.ground_truth_path, "run `ingest` first"))
        protein_list = [p.strip() for p in proteins.split(",")] if proteins else gt.proteins
        if not protein_list:
            raise _fail("no proteins to run; pass --proteins or ingest a non-empty ground truth")
        embedder = make_embedder(embedder_spec)
        responder = make_responder(responder_spec, workspace)
        if method == "zero-shot":
            store_a = store_f = None
            template = PromptTemplate.from_file(template_path) if template_path else default_template("zero_shot")
        else:
            store_a, store_f = _load_stores(workspace)
            template = PromptTemplate.from_file(template_path) if template_path else default_template("rag")
        retrieval = _retrieval_config(cfg)
        records = []
        for iteration in range(1, cfg.iterations + 1):
            for protein in protein_list:
                result = run_method(
                    method, embedder, responder, store_a, store_f,
                    retrieval, cfg.virus, protein, template,
                )
                records.append(RunRecord(protein=protein, iteration=iteration, result=result))
        manifest = RunManifest(
            method=method,
            virus=cfg.virus,
            config=retrieval,
            template_id=template.template_id,
            embedder=embedder.name,
            responder=responder.name,
            created_at=fixed_clock or utc_now(),
            records=records,
        )
        out_path = workspace.runs_dir / (out_name or f"{method}.json")
        save_manifest(manifest, out_path)
    except click.ClickException:
        raise
    except (OSError, ValueError, RuntimeError) as exc:
        raise _fail(str(exc))
    click.echo(f"wrote {out_path} ({len(records)} records)")


@main.command()
@click.option("--manifest", "manifest_paths", type=click.Path(path_type=Path), multiple=True,
              help="Manifest file(s); defaults to every runs/*.json.")
@click.option("--ground-truth", "gt_path", type=click.Path(path_type=Path), default=None)
@click.option("--out-dir", type=click.Path(path_type=Path), default=None)
@click.pass_context
def evaluate(ctx, manifest_paths, gt_path, out_dir):
    """Score manifests against ground truth: CSV, summary JSON, and a figure."""
    workspace: Workspace = ctx.obj["workspace"]
    gt_path = Path(gt_path) if gt_path else workspace.ground_truth_path
    out_dir = Path(out_dir) if out_dir else workspace.results_dir
    try:
        gt, _ = load_ground_truth(_require(gt_path, "run `ingest` first or pass --ground-truth"))
        paths = [Path(p) for p in manifest_paths] or sorted(workspace.runs_dir.glob("*.json"))
        if not paths:
            raise _fail(f"no manifests found under {workspace.runs_dir}; run `run` first")
        rows = []
        responders: dict[str, str] = {}
        datastores: dict[str, str] = {}
        for path in paths:
            manifest = load_manifest(_require(path, "pass an existing manifest"))
            rows.extend(manifest_rows(manifest, gt))
            responders[manifest.method] = manifest.responder
            datastores[manifest.method] = manifest.embedder
        summaries = summarize(rows)
        write_results_csv(rows, out_dir / "results.csv")
        write_summary_json(summary_payload(summaries, responders, datastores), out_dir / "summary.json")
        from .figures import save_metrics_figure

        save_metrics_figure(summaries, out_dir / "metrics.png")
    except click.ClickException:
        raise
    except (OSError, ValueError) as exc:
        raise _fail(str(exc))
    for method in sorted(summaries):
        stats = summaries[method].get("overall")
        if stats:
            click.echo(
                f"{method}: F1 {stats.f1_mean:.3f}+/-{stats.f1_std:.3f}"
                f" P {stats.precision_mean:.3f}+/-{stats.precision_std:.3f}"
                f" R {stats.recall_mean:.3f}+/-{stats.recall_std:.3f}"
                f" (n={stats.n})"
            )
    click.echo(f"wrote {out_dir / 'results.csv'}, {out_dir / 'summary.json'}, {out_dir / 'metrics.png'}")


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise _fail(f"{flag} expects a comma-separated list of integers, got {text!r}")
    if not values:
        raise _fail(f"{flag} must not be empty")
    return values


@main.command()
@click.option("--k-a", "k_a_list", default="5,10,20,40,80,160", show_default=True)
@click.option("--k-c", "k_c_list", default="160", show_default=True)
@click.option("--iterations", type=int, default=1, show_default=True)
@click.option("--embedder", "embedder_spec", default="mock", show_default=True)
@click.option("--responder", "responder_spec", default="mock:oracle", show_default=True)
@click.option("--t", type=float, default=None)
@click.option("--t-level2", "t_level2", type=float, default=None)
@click.option("--virus", default=None)
@click.pass_context
def sweep(ctx, k_a_list, k_c_list, iterations, embedder_spec, responder_spec, t, t_level2, virus):
    """Grid-run the two-stage method over k_a x k_c; write CSV and a figure."""
    workspace: Workspace = ctx.obj["workspace"]
    cfg = _merge_config(ctx, virus=virus, t=t, t_level2=t_level2)
    try:
        gt, _ = load_ground_truth(_require(workspace.ground_truth_path, "run `ingest` first"))
        store_a, store_f = _load_stores(workspace)
        embedder = make_embedder(embedder_spec)
        responder = make_responder(responder_spec, workspace)
        cells = run_sweep(
            embedder, responder, store_a, store_f, gt, default_template("rag"),
            cfg.virus, _retrieval_config(cfg),
            k_a_values=_parse_int_list(k_a_list, "--k-a"),
            k_c_values=_parse_int_list(k_c_list, "--k-c"),
            iterations=iterations,
        )
        out_dir = workspace.results_dir
        write_sweep_csv(cells, out_dir / "sweep.csv")
        from .figures import save_sweep_figure

        save_sweep_figure(cells, out_dir / "sweep.png")
    except click.ClickException:
        raise
    except (OSError, ValueError) as exc:
        raise _fail(str(exc))
    for cell in cells:
        if cell.error:
            click.echo(f"k_a={cell.k_a} k_c={cell.k_c}: failed: {cell.error}", err=True)
            continue
        stats = cell.summary["villa"]["overall"]
        click.echo(f"k_a={cell.k_a} k_c={cell.k_c}: F1 {stats.f1_mean:.3f} R {stats.recall_mean:.3f}")
    click.echo(f"wrote {out_dir / 'sweep.csv'}, {out_dir / 'sweep.png'}")


@main.command("analyze-distances")
@click.option("--embedder", "embedder_spec", default="mock", show_default=True)
@click.option("--virus", default=None)
@click.pass_context
def analyze_distances(ctx, embedder_spec, virus):
    """Compare prompt-to-abstract distances of relevant vs non-relevant abstracts."""
    workspace: Workspace = ctx.obj["workspace"]
    cfg = _merge_config(ctx, virus=virus)
    try:
        corpus = load_corpus(_require(workspace.corpus_path, "run `ingest` first"))
        gt, _ = load_ground_truth(_require(workspace.ground_truth_path, "run `ingest` first"))
        embedder = make_embedder(embedder_spec)
        template = default_template("rag")
        prompts = {
            protein: retrieval_query(template, cfg.virus, protein, cfg.query_mode)
            for protein in gt.proteins
        }
        results, warnings = abstract_distance_analysis(embedder, gt, corpus, prompts)
        out_dir = workspace.results_dir
        write_distance_csv(results, out_dir / "distances.csv")
        from .figures import save_distance_figure

        save_distance_figure(results, out_dir / "distances.png")
    except click.ClickException:
        raise
    except (OSError, ValueError) as exc:
        raise _fail(str(exc))
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)
    for result in results:
        click.echo(
            f"{result.protein}: U={result.u:.1f} p={result.p:.4g}"
            f" (relevant n={len(result.relevant)}, non-relevant n={len(result.non_relevant)})"
        )
    click.echo(f"wrote {out_dir / 'distances.csv'}, {out_dir / 'distances.png'}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--tokens-file", type=click.Path(path_type=Path, exists=True), required=True,
              help='JSON: {"<token>": {"evaluator_id": ..., "role": "evaluator"|"admin"}}.')
@click.option("--ingest", "ingest_manifests", type=click.Path(path_type=Path, exists=True), multiple=True,
              help="Run manifest(s) to load as review items at startup.")
@click.pass_context
def serve(ctx, host, port, tokens_file, ingest_manifests):
    """Start the expert review service."""
    workspace: Workspace = ctx.obj["workspace"]
    from .review_api import ReviewStore, create_app, load_tokens

    try:
        tokens = load_tokens(tokens_file)
        workspace.review_dir.mkdir(parents=True, exist_ok=True)
        store = ReviewStore(journal_path=workspace.review_dir / "journal.jsonl")
        for path in ingest_manifests:
            with open(path, encoding="utf-8") as handle:
                created = store.ingest_manifest(json.load(handle))
            click.echo(f"ingested {len(created)} items from {path}")
    except (OSError, ValueError) as exc:
        raise _fail(str(exc))
    app = create_app(store, tokens)
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
