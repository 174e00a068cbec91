"""Text embedding backends.

Two interchangeable backends sit behind the same small interface: a remote
HTTP client speaking a generic embeddings endpoint, and a deterministic
token-bag mock for offline runs and tests. Some remote services use
distinct encoders for queries and documents, so every embed call carries a
``role`` flag; backends with a single encoder ignore it.
"""

from __future__ import annotations

import hashlib
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import httpx
import numpy as np

logger = logging.getLogger(__name__)

ROLE_QUERY = "query"
ROLE_DOCUMENT = "document"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class EmbeddingError(RuntimeError):
    """Base class for embedding failures."""


class EmbeddingTransportError(EmbeddingError):
    """Remote endpoint unreachable or persistently failing."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class EmbeddingContractError(EmbeddingError):
    """Remote endpoint returned a payload violating the wire contract."""


class BatchEmbeddingError(EmbeddingError):
    """Some items of a batch could not be embedded.

    ``item_errors`` holds (input index, message) pairs for every failed
    item; successfully embedded items are not reported.
    """

    def __init__(self, item_errors: list[tuple[int, str]]):
        super().__init__(f"{len(item_errors)} of the batch items failed: {item_errors}")
        self.item_errors = item_errors


class EmbedderBase:
    """Shared batch behavior: batch output equals a map of single embeds."""

    name: str
    dim: int

    def embed(self, text: str, role: str = ROLE_DOCUMENT) -> np.ndarray:
        raise NotImplementedError

    def embed_batch(self, texts: Sequence[str], role: str = ROLE_DOCUMENT) -> list[np.ndarray]:
        return [self.embed(text, role=role) for text in texts]


def embed(embedder: EmbedderBase, text: str, role: str = ROLE_DOCUMENT) -> np.ndarray:
    return embedder.embed(text, role=role)


def embed_batch(embedder: EmbedderBase, texts: Sequence[str], role: str = ROLE_DOCUMENT) -> list[np.ndarray]:
    """Embed many texts; output order matches input order."""
    return embedder.embed_batch(texts, role=role)


class MockEmbedder(EmbedderBase):
    """Deterministic bag-of-tokens embedder.

    Lowercases, splits on non-alphanumerics, hashes each token (seeded)
    into one of ``dim`` buckets, counts, then L2-normalizes. A text with
    no tokens maps to the first basis vector. Bit-exact across runs and
    platforms, which makes retrieval fixtures reproducible.
    """

    def __init__(self, seed: int = 7, dim: int = 64):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.seed = seed
        self.dim = dim
        self.name = f"mock:seed={seed},dim={dim}"

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(f"{self.seed}:{token}".encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def token_buckets(self, text: str) -> dict[str, int]:
        """Token -> bucket map; exposed so tests can rule out collisions."""
        return {token: self._bucket(token) for token in _TOKEN_RE.findall(text.lower())}

    def embed(self, text: str, role: str = ROLE_DOCUMENT) -> np.ndarray:
        counts = np.zeros(self.dim, dtype=np.float64)
        for token in _TOKEN_RE.findall(text.lower()):
            counts[self._bucket(token)] += 1.0
        norm = float(np.linalg.norm(counts))
        if norm == 0.0:
            basis = np.zeros(self.dim, dtype=np.float64)
            basis[0] = 1.0
            return basis
        return counts / norm


class RemoteEmbedder(EmbedderBase):
    """Client for a generic embeddings endpoint.

    Wire contract: POST JSON ``{"model": ..., "input": [texts]}`` to
    ``base_url``; the response carries ``{"data": [{"index": i,
    "embedding": [floats]}, ...]}``. Retries 429 and 5xx responses with
    exponential backoff. When ``query_model`` is set, embeds requested
    with role="query" use it instead of ``model``.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        dim: int,
        api_key: str | None = None,
        query_model: str | None = None,
        context_limit: int | None = None,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 30.0,
        batch_size: int = 64,
        parallelism: int = 1,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url
        self.model = model
        self.dim = dim
        self.api_key = api_key
        self.query_model = query_model
        self.context_limit = context_limit
        self.retries = retries
        self.backoff = backoff
        self.batch_size = batch_size
        self.parallelism = max(1, parallelism)
        self.name = model
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _post(self, payload: dict) -> dict:
        last_status: int | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(self.base_url, json=payload, headers=self._headers())
            except httpx.TransportError as exc:
                if attempt == self.retries:
                    raise EmbeddingTransportError(f"embeddings endpoint unreachable: {exc}") from exc
                time.sleep(self.backoff * 2**attempt)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_status = response.status_code
                if attempt == self.retries:
                    break
                time.sleep(self.backoff * 2**attempt)
                continue
            if response.status_code != 200:
                raise EmbeddingTransportError(
                    f"embeddings endpoint returned {response.status_code}: {response.text[:200]}",
                    status=response.status_code,
                )
            try:
                return response.json()
            except ValueError as exc:
                raise EmbeddingContractError(f"response is not JSON: {exc}") from exc
        raise EmbeddingTransportError(
            f"embeddings endpoint failed after {self.retries + 1} attempts (last status {last_status})",
            status=last_status,
        )

    def _truncate(self, text: str) -> str:
        if self.context_limit is not None and len(text) > self.context_limit:
            logger.warning(
                "input of %d characters exceeds context limit %d; truncating",
                len(text),
                self.context_limit,
            )
            return text[: self.context_limit]
        return text

    def _model_for(self, role: str) -> str:
        if role == ROLE_QUERY and self.query_model:
            return self.query_model
        return self.model

    def _to_vector(self, values, index: int) -> np.ndarray:
        vector = np.asarray(values, dtype=np.float64)
        if vector.ndim != 1 or vector.shape[0] != self.dim:
            raise EmbeddingContractError(
                f"item {index}: expected {self.dim} values, got shape {vector.shape}"
            )
        if not np.all(np.isfinite(vector)):
            raise EmbeddingContractError(f"item {index}: embedding contains non-finite values")
        return vector

    def embed(self, text: str, role: str = ROLE_DOCUMENT) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        payload = {"model": self._model_for(role), "input": [self._truncate(text)]}
        body = self._post(payload)
        data = body.get("data")
        if not isinstance(data, list) or len(data) != 1:
            raise EmbeddingContractError(f"expected 1 data item, got {data!r}")
        return self._to_vector(data[0].get("embedding"), 0)

    def _embed_sub_batch(self, indexed: list[tuple[int, str]], role: str):
        payload = {
            "model": self._model_for(role),
            "input": [self._truncate(text) for _, text in indexed],
        }
        body = self._post(payload)
        data = body.get("data")
        if not isinstance(data, list):
            raise EmbeddingContractError(f"expected a data list, got {data!r}")
        by_index = {}
        for item in data:
            if isinstance(item, dict) and isinstance(item.get("index"), int):
                by_index[item["index"]] = item.get("embedding")
        results: dict[int, np.ndarray] = {}
        errors: list[tuple[int, str]] = []
        for local, (original, _) in enumerate(indexed):
            if local not in by_index:
                errors.append((original, "missing from response"))
                continue
            try:
                results[original] = self._to_vector(by_index[local], original)
            except EmbeddingContractError as exc:
                errors.append((original, str(exc)))
        return results, errors

    def embed_batch(self, texts: Sequence[str], role: str = ROLE_DOCUMENT) -> list[np.ndarray]:
        """Embed a batch, dispatching sub-batches with bounded parallelism.

        Transport failures abort the whole batch; per-item problems are
        collected and raised together as :class:`BatchEmbeddingError`.
        """
        if not texts:
            return []
        indexed = list(enumerate(texts))
        sub_batches = [
            indexed[i : i + self.batch_size] for i in range(0, len(indexed), self.batch_size)
        ]
        results: dict[int, np.ndarray] = {}
        errors: list[tuple[int, str]] = []
        if self.parallelism == 1 or len(sub_batches) == 1:
            outcomes = [self._embed_sub_batch(batch, role) for batch in sub_batches]
        else:
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                outcomes = list(pool.map(lambda b: self._embed_sub_batch(b, role), sub_batches))
        for sub_results, sub_errors in outcomes:
            results.update(sub_results)
            errors.extend(sub_errors)
        if errors:
            raise BatchEmbeddingError(sorted(errors))
        return [results[i] for i in range(len(texts))]
