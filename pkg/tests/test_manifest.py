from __future__ import annotations

from villa.manifest import (
    RunManifest,
    RunRecord,
    load_manifest,
    manifest_from_dict,
    manifest_to_dict,
    save_manifest,
)
from villa.mutation import parse_mutation
from villa.pipeline import ExtractionResult, PerPublicationResult, RetrievalConfig


def _manifest():
    result = ExtractionResult(
        protein="PB2",
        virus="influenza A",
        method="villa",
        mutations={parse_mutation("E627K"), parse_mutation("D701N")},
        reasoning="[P1] found\n[P2] found",
        context_pub_ids={"P2", "P1"},
        per_publication=[
            PerPublicationResult(
                pub_id="P1",
                mutations={parse_mutation("E627K")},
                reasoning="found",
                raw_response='{"mutations": ["E627K"], "reasoning": "found"}',
            ),
            PerPublicationResult(pub_id="P2", error="boom"),
        ],
        rejects=["Δ123"],
    )
    return RunManifest(
        method="villa",
        virus="influenza A",
        config=RetrievalConfig(k_a=6, k_c=4, k=1, t=2.0),
        template_id="default-rag",
        embedder="mock:seed=7,dim=256",
        responder="mock:oracle",
        created_at="2026-01-02T03:04:05+00:00",
        records=[RunRecord(protein="PB2", iteration=1, result=result)],
    )


def test_round_trip_preserves_everything():
    manifest = _manifest()
    rebuilt = manifest_from_dict(manifest_to_dict(manifest))
    assert rebuilt == manifest


def test_save_load_round_trip(tmp_path):
    manifest = _manifest()
    path = tmp_path / "runs" / "villa.json"
    save_manifest(manifest, path)
    assert load_manifest(path) == manifest


def test_serialization_is_deterministic(tmp_path):
    manifest = _manifest()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_manifest(manifest, a)
    save_manifest(manifest, b)
    assert a.read_bytes() == b.read_bytes()


def test_mutations_serialized_sorted_canonical():
    payload = manifest_to_dict(_manifest())
    stored = payload["records"][0]["result"]["mutations"]
    assert stored == sorted(stored) == ["D701N", "E627K"]
