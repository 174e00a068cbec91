"""Run manifests: the JSON unit connecting extraction runs to evaluation and review.

A manifest records one invocation of an extraction method: the method and
its configuration, the embedder/responder identities, and one extraction
result per (protein, iteration). Serialization is deterministic (sorted
keys, sorted sets) so identical runs produce byte-identical files when the
clock is fixed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .mutation import parse_mutation
from .pipeline import ExtractionResult, PerPublicationResult, RetrievalConfig

MANIFEST_VERSION = 1


@dataclass
class RunRecord:
    protein: str
    iteration: int
    result: ExtractionResult


@dataclass
class RunManifest:
    method: str
    virus: str
    config: RetrievalConfig
    template_id: str
    embedder: str
    responder: str
    created_at: str
    records: list[RunRecord] = field(default_factory=list)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _result_to_dict(result: ExtractionResult) -> dict:
    payload = {
        "protein": result.protein,
        "virus": result.virus,
        "method": result.method,
        "mutations": sorted(m.canonical() for m in result.mutations),
        "reasoning": result.reasoning,
        "raw_response": result.raw_response,
        "context_pub_ids": sorted(result.context_pub_ids),
        "rejects": list(result.rejects),
        "error": result.error,
    }
    if result.per_publication is not None:
        payload["per_publication"] = [
            {
                "pub_id": slot.pub_id,
                "mutations": sorted(m.canonical() for m in slot.mutations),
                "reasoning": slot.reasoning,
                "raw_response": slot.raw_response,
                "rejects": list(slot.rejects),
                "error": slot.error,
            }
            for slot in result.per_publication
        ]
    return payload


def _result_from_dict(payload: dict) -> ExtractionResult:
    per_publication = None
    if "per_publication" in payload:
        per_publication = [
            PerPublicationResult(
                pub_id=slot["pub_id"],
                mutations={parse_mutation(m) for m in slot["mutations"]},
                reasoning=slot.get("reasoning", ""),
                raw_response=slot.get("raw_response", ""),
                rejects=list(slot.get("rejects", [])),
                error=slot.get("error"),
            )
            for slot in payload["per_publication"]
        ]
    return ExtractionResult(
        protein=payload["protein"],
        virus=payload["virus"],
        method=payload["method"],
        mutations={parse_mutation(m) for m in payload["mutations"]},
        reasoning=payload.get("reasoning", ""),
        raw_response=payload.get("raw_response", ""),
        context_pub_ids=set(payload.get("context_pub_ids", [])),
        per_publication=per_publication,
        rejects=list(payload.get("rejects", [])),
        error=payload.get("error"),
    )


def manifest_to_dict(manifest: RunManifest) -> dict:
    return {
        "manifest_version": MANIFEST_VERSION,
        "method": manifest.method,
        "virus": manifest.virus,
        "config": asdict(manifest.config),
        "template_id": manifest.template_id,
        "embedder": manifest.embedder,
        "responder": manifest.responder,
        "created_at": manifest.created_at,
        "records": [
            {
                "protein": record.protein,
                "iteration": record.iteration,
                "result": _result_to_dict(record.result),
            }
            for record in manifest.records
        ],
    }


def manifest_from_dict(payload: dict) -> RunManifest:
    config = RetrievalConfig(**payload["config"])
    return RunManifest(
        method=payload["method"],
        virus=payload["virus"],
        config=config,
        template_id=payload["template_id"],
        embedder=payload["embedder"],
        responder=payload["responder"],
        created_at=payload["created_at"],
        records=[
            RunRecord(
                protein=record["protein"],
                iteration=record["iteration"],
                result=_result_from_dict(record["result"]),
            )
            for record in payload["records"]
        ],
    )


def save_manifest(manifest: RunManifest, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as out:
        json.dump(manifest_to_dict(manifest), out, indent=2, sort_keys=True)
        out.write("\n")


def load_manifest(path) -> RunManifest:
    with open(path, encoding="utf-8") as handle:
        return manifest_from_dict(json.load(handle))
