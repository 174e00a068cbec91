from __future__ import annotations

import json

import httpx
import numpy as np
import pytest

from villa.embedding import (
    BatchEmbeddingError,
    EmbeddingContractError,
    EmbeddingTransportError,
    MockEmbedder,
    RemoteEmbedder,
    embed_batch,
)


# -- mock embedder ---------------------------------------------------------


def test_mock_is_deterministic():
    embedder = MockEmbedder(seed=7, dim=16)
    first = embedder.embed("abc def")
    second = embedder.embed("abc def")
    assert np.array_equal(first, second)
    again = MockEmbedder(seed=7, dim=16).embed("abc def")
    assert np.array_equal(first, again)


def test_mock_vectors_are_unit_norm():
    embedder = MockEmbedder(seed=3, dim=32)
    for text in ["one", "one two three", "a b c d e f g", "!!!"]:
        assert np.linalg.norm(embedder.embed(text)) == pytest.approx(1.0)


def test_same_token_bag_gives_distance_zero():
    embedder = MockEmbedder(seed=5, dim=16)
    a = embedder.embed("Virus HOST virus")
    b = embedder.embed("host virus virus")
    from villa.vectorstore import cosine_distance

    assert cosine_distance(a, b) == pytest.approx(0.0, abs=1e-12)


def test_disjoint_token_sets_give_distance_one():
    from villa.vectorstore import cosine_distance

    embedder = MockEmbedder(seed=11, dim=512)
    text_a = "alpha beta gamma delta"
    text_b = "epsilon zeta eta theta"
    buckets_a = set(embedder.token_buckets(text_a).values())
    buckets_b = set(embedder.token_buckets(text_b).values())
    assert not buckets_a & buckets_b, "hash collision; pick another seed/dim"
    assert cosine_distance(embedder.embed(text_a), embedder.embed(text_b)) == pytest.approx(1.0)


def test_tokenless_text_maps_to_first_basis_vector():
    embedder = MockEmbedder(seed=7, dim=8)
    expected = np.zeros(8)
    expected[0] = 1.0
    assert np.array_equal(embedder.embed("!!! --- ???"), expected)


def test_dim_below_two_rejected():
    with pytest.raises(ValueError):
        MockEmbedder(seed=1, dim=1)


def test_batch_empty():
    assert embed_batch(MockEmbedder(), []) == []


def test_batch_equals_pointwise():
    embedder = MockEmbedder(seed=2, dim=24)
    texts = ["a", "b"]
    batch = embed_batch(embedder, texts)
    assert np.array_equal(batch[0], embedder.embed("a"))
    assert np.array_equal(batch[1], embedder.embed("b"))


def test_batch_of_1000_preserves_order():
    embedder = MockEmbedder(seed=9, dim=32)
    texts = [f"token{i} filler{i % 13}" for i in range(1000)]
    batch = embedder.embed_batch(texts)
    assert len(batch) == 1000
    for i in (0, 1, 499, 998, 999):
        assert np.array_equal(batch[i], embedder.embed(texts[i]))


# -- remote embedder -------------------------------------------------------


def _embedding_response(vectors):
    return {"data": [{"index": i, "embedding": list(v)} for i, v in enumerate(vectors)]}


def _transport(handler):
    return httpx.MockTransport(handler)


def _remote(handler, dim=16, **kwargs) -> RemoteEmbedder:
    kwargs.setdefault("backoff", 0.0)
    return RemoteEmbedder(
        base_url="http://embeddings.test/v1/embeddings",
        model="test-embedder",
        dim=dim,
        transport=_transport(handler),
        **kwargs,
    )


def test_remote_dimension_mismatch_is_contract_violation():
    def handler(request):
        return httpx.Response(200, json=_embedding_response([[0.1] * 8]))

    embedder = _remote(handler, dim=16)
    with pytest.raises(EmbeddingContractError, match="expected 16"):
        embedder.embed("some text")


def test_remote_retries_on_429_then_succeeds():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] <= 2:
            return httpx.Response(429, json={"error": "rate limited"})
        return httpx.Response(200, json=_embedding_response([[1.0] + [0.0] * 15]))

    embedder = _remote(handler, dim=16)
    vector = embedder.embed("hello")
    assert calls["n"] == 3
    assert vector.shape == (16,)


def test_remote_persistent_500_raises_transport_error_with_status():
    def handler(request):
        return httpx.Response(503, text="nope")

    embedder = _remote(handler, dim=16, retries=2)
    with pytest.raises(EmbeddingTransportError) as excinfo:
        embedder.embed("hello")
    assert excinfo.value.status == 503


def test_remote_truncates_overlong_input(caplog):
    seen = {}

    def handler(request):
        seen["payload"] = json.loads(request.content)
        return httpx.Response(200, json=_embedding_response([[1.0, 0.0]]))

    embedder = _remote(handler, dim=2, context_limit=10)
    with caplog.at_level("WARNING"):
        embedder.embed("x" * 50)
    assert seen["payload"]["input"] == ["x" * 10]
    assert any("truncating" in record.message for record in caplog.records)


def test_remote_query_role_uses_query_model():
    seen = {}

    def handler(request):
        seen.setdefault("models", []).append(json.loads(request.content)["model"])
        return httpx.Response(200, json=_embedding_response([[1.0, 0.0]]))

    embedder = _remote(handler, dim=2, query_model="test-query-encoder")
    embedder.embed("doc text", role="document")
    embedder.embed("query text", role="query")
    assert seen["models"] == ["test-embedder", "test-query-encoder"]


def test_remote_batch_reports_per_item_errors():
    def handler(request):
        payload = json.loads(request.content)
        # drop the second item, corrupt the third
        vectors = [{"index": 0, "embedding": [1.0, 0.0]}, {"index": 2, "embedding": [1.0]}]
        assert len(payload["input"]) == 3
        return httpx.Response(200, json={"data": vectors})

    embedder = _remote(handler, dim=2)
    with pytest.raises(BatchEmbeddingError) as excinfo:
        embedder.embed_batch(["a", "b", "c"])
    indices = [index for index, _ in excinfo.value.item_errors]
    assert indices == [1, 2]


def test_remote_batch_order_matches_input():
    def handler(request):
        payload = json.loads(request.content)
        vectors = [[float(len(text)), 0.0] for text in payload["input"]]
        return httpx.Response(200, json=_embedding_response(vectors))

    embedder = _remote(handler, dim=2, batch_size=2)
    batch = embedder.embed_batch(["a", "bb", "ccc", "dddd", "eeeee"])
    assert [v[0] for v in batch] == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_remote_non_finite_values_rejected():
    def handler(request):
        # hand-encode: json.dumps emits NaN (allow_nan), which loads() accepts
        body = json.dumps(_embedding_response([[float("nan"), 0.0]]))
        return httpx.Response(200, content=body.encode(), headers={"content-type": "application/json"})

    embedder = _remote(handler, dim=2)
    with pytest.raises(EmbeddingContractError, match="non-finite"):
        embedder.embed("text")
