"""HTTP service for blind expert review of extraction outputs.

Evaluators browse anonymized items (method and model are never exposed on
evaluator routes), score each item on a five-category rubric, and may leave
a comment. Admins ingest run manifests, which become review items with
opaque ids, and export all evaluations (unblinded) as CSV.

Persistence is an append-only JSONL journal with snapshot compaction; a
submission is fsynced before it is acknowledged. At the expected load
(tens of evaluators) this needs no external database.
"""

from __future__ import annotations

import csv
import io
import json
import os
import secrets
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request, Response
from pydantic import BaseModel

RUBRIC_CATEGORIES = ("clarity", "conciseness", "correctness", "citations_context", "contribution")

ROLE_EVALUATOR = "evaluator"
ROLE_ADMIN = "admin"


@dataclass(frozen=True)
class TokenInfo:
    evaluator_id: str
    role: str = ROLE_EVALUATOR


@dataclass
class ReviewItem:
    item_id: str
    virus: str
    protein: str
    mutations: list[str]
    reasoning: str
    # blind fields: stored for the admin export, never sent to evaluators
    method: str = ""
    model: str = ""


@dataclass
class RubricEvaluation:
    item_id: str
    evaluator_id: str
    scores: dict[str, int]
    comment: str = ""
    submitted_at: str = ""


class ReviewStore:
    """Items and evaluations with a JSONL journal and snapshot compaction."""

    def __init__(self, journal_path=None, id_source=None):
        self._lock = threading.Lock()
        self.items: dict[str, ReviewItem] = {}
        self.evaluations: dict[tuple[str, str], RubricEvaluation] = {}
        self._journal_path = Path(journal_path) if journal_path else None
        self._snapshot_path = (
            self._journal_path.with_suffix(".snapshot.json") if self._journal_path else None
        )
        self._id_source = id_source or (lambda: secrets.token_hex(6))
        if self._journal_path:
            self._replay()

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        if self._snapshot_path and self._snapshot_path.exists():
            snapshot = json.loads(self._snapshot_path.read_text(encoding="utf-8"))
            for raw in snapshot.get("items", []):
                item = ReviewItem(**raw)
                self.items[item.item_id] = item
            for raw in snapshot.get("evaluations", []):
                evaluation = RubricEvaluation(**raw)
                self.evaluations[(evaluation.item_id, evaluation.evaluator_id)] = evaluation
        if self._journal_path.exists():
            with open(self._journal_path, encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    if record["type"] == "item":
                        item = ReviewItem(**record["payload"])
                        self.items[item.item_id] = item
                    elif record["type"] == "evaluation":
                        evaluation = RubricEvaluation(**record["payload"])
                        self.evaluations[(evaluation.item_id, evaluation.evaluator_id)] = evaluation

    def _append(self, record_type: str, payload: dict) -> None:
        if not self._journal_path:
            return
        self._journal_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self._journal_path, "a", encoding="utf-8") as out:
            out.write(json.dumps({"type": record_type, "payload": payload}, sort_keys=True) + "\n")
            out.flush()
            os.fsync(out.fileno())

    def compact(self) -> None:
        """Fold the journal into a snapshot and truncate it."""
        if not self._journal_path:
            return
        with self._lock:
            snapshot = {
                "items": [asdict(item) for item in self.items.values()],
                "evaluations": [asdict(e) for e in self.evaluations.values()],
            }
            tmp = self._snapshot_path.with_suffix(".tmp")
            tmp.write_text(json.dumps(snapshot, sort_keys=True), encoding="utf-8")
            os.replace(tmp, self._snapshot_path)
            self._journal_path.write_text("", encoding="utf-8")

    # -- operations ---------------------------------------------------------

    def ingest_manifest(self, manifest: dict) -> list[str]:
        """Create one anonymized review item per manifest record."""
        created: list[str] = []
        with self._lock:
            for record in manifest.get("records", []):
                result = record["result"]
                item_id = self._id_source()
                while item_id in self.items:
                    item_id = self._id_source()
                item = ReviewItem(
                    item_id=item_id,
                    virus=result.get("virus", manifest.get("virus", "")),
                    protein=record.get("protein", result.get("protein", "")),
                    mutations=list(result.get("mutations", [])),
                    reasoning=result.get("reasoning", ""),
                    method=manifest.get("method", ""),
                    model=manifest.get("responder", ""),
                )
                self.items[item.item_id] = item
                self._append("item", asdict(item))
                created.append(item_id)
        return created

    def submit(self, evaluation: RubricEvaluation) -> RubricEvaluation:
        """Upsert one evaluation per (item, evaluator); durable before return."""
        with self._lock:
            self.evaluations[(evaluation.item_id, evaluation.evaluator_id)] = evaluation
            self._append("evaluation", asdict(evaluation))
        return evaluation

    def status_for(self, item_id: str, evaluator_id: str) -> str:
        return "completed" if (item_id, evaluator_id) in self.evaluations else "pending"


class EvaluationBody(BaseModel):
    scores: dict[str, int]
    comment: str = ""


def validate_scores(scores: dict[str, int]) -> None:
    for category in RUBRIC_CATEGORIES:
        if category not in scores:
            raise HTTPException(status_code=422, detail=f"missing category: {category}")
        value = scores[category]
        if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
            raise HTTPException(
                status_code=422,
                detail=f"category {category}: score must be an integer in 1..5, got {value!r}",
            )
    unknown = set(scores) - set(RUBRIC_CATEGORIES)
    if unknown:
        raise HTTPException(status_code=422, detail=f"unknown categories: {sorted(unknown)}")


def create_app(store: ReviewStore, tokens: dict[str, TokenInfo], clock=None) -> FastAPI:
    """Build the review service around a store and a pre-shared token map."""
    app = FastAPI(title="extraction review service")
    now = clock or (lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def authenticate(request: Request) -> TokenInfo:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        info = tokens.get(header[7:].strip())
        if info is None:
            raise HTTPException(status_code=401, detail="unknown token")
        return info

    def require_admin(caller: TokenInfo = Depends(authenticate)) -> TokenInfo:
        if caller.role != ROLE_ADMIN:
            raise HTTPException(status_code=403, detail="admin role required")
        return caller

    def evaluator_view(item: ReviewItem, evaluator_id: str) -> dict:
        # blind view: no method, no model
        return {
            "item_id": item.item_id,
            "virus": item.virus,
            "protein": item.protein,
            "mutations": item.mutations,
            "reasoning": item.reasoning,
            "status": store.status_for(item.item_id, evaluator_id),
        }

    @app.get("/health")
    def health():
        return {"status": "ok", "items": len(store.items)}

    @app.get("/items")
    def list_items(
        caller: TokenInfo = Depends(authenticate),
        virus: str | None = None,
        protein: str | None = None,
        status: str | None = None,
        sort: str = Query("item_id", pattern="^-?item_id$"),
        limit: int = Query(100, ge=1, le=1000),
        offset: int = Query(0, ge=0),
    ):
        views = [evaluator_view(item, caller.evaluator_id) for item in store.items.values()]
        if virus is not None:
            views = [v for v in views if v["virus"] == virus]
        if protein is not None:
            views = [v for v in views if v["protein"] == protein]
        if status is not None:
            if status not in ("pending", "completed"):
                raise HTTPException(status_code=422, detail="status must be pending or completed")
            views = [v for v in views if v["status"] == status]
        views.sort(key=lambda v: v["item_id"], reverse=sort.startswith("-"))
        total = len(views)
        page = views[offset : offset + limit]
        completed = sum(1 for v in views if v["status"] == "completed")
        return {"items": page, "total": total, "completed": completed, "limit": limit, "offset": offset}

    @app.get("/items/{item_id}")
    def get_item(item_id: str, caller: TokenInfo = Depends(authenticate)):
        item = store.items.get(item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id!r}")
        view = evaluator_view(item, caller.evaluator_id)
        existing = store.evaluations.get((item_id, caller.evaluator_id))
        view["evaluation"] = (
            {"scores": existing.scores, "comment": existing.comment, "submitted_at": existing.submitted_at}
            if existing
            else None
        )
        view["rubric_categories"] = list(RUBRIC_CATEGORIES)
        return view

    @app.put("/items/{item_id}/evaluation")
    def submit_evaluation(item_id: str, body: EvaluationBody, caller: TokenInfo = Depends(authenticate)):
        if store.items.get(item_id) is None:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id!r}")
        validate_scores(body.scores)
        evaluation = RubricEvaluation(
            item_id=item_id,
            evaluator_id=caller.evaluator_id,
            scores={category: body.scores[category] for category in RUBRIC_CATEGORIES},
            comment=body.comment,
            submitted_at=now(),
        )
        store.submit(evaluation)
        return {"item_id": item_id, "evaluator_id": caller.evaluator_id, "status": "completed"}

    @app.post("/admin/items")
    def ingest_items(manifest: dict, caller: TokenInfo = Depends(require_admin)):
        created = store.ingest_manifest(manifest)
        return {"created": created}

    @app.get("/admin/export.csv")
    def export_csv(caller: TokenInfo = Depends(require_admin)):
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(
            [
                "item_id",
                "evaluator_id",
                *RUBRIC_CATEGORIES,
                "comment",
                "submitted_at",
                "method",
                "model",
                "virus",
                "protein",
            ]
        )
        for (item_id, evaluator_id), evaluation in sorted(store.evaluations.items()):
            item = store.items.get(item_id)
            writer.writerow(
                [
                    item_id,
                    evaluator_id,
                    *[evaluation.scores[c] for c in RUBRIC_CATEGORIES],
                    evaluation.comment,
                    evaluation.submitted_at,
                    item.method if item else "",
                    item.model if item else "",
                    item.virus if item else "",
                    item.protein if item else "",
                ]
            )
        return Response(content=buffer.getvalue(), media_type="text/csv")

    return app


def load_tokens(path) -> dict[str, TokenInfo]:
    """Token file: {"<token>": {"evaluator_id": ..., "role": ...}, ...}"""
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    tokens = {}
    for token, info in raw.items():
        role = info.get("role", ROLE_EVALUATOR)
        if role not in (ROLE_EVALUATOR, ROLE_ADMIN):
            raise ValueError(f"token {token!r}: unknown role {role!r}")
        tokens[token] = TokenInfo(evaluator_id=info["evaluator_id"], role=role)
    return tokens
