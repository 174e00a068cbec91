"""Exact thresholded top-k cosine retrieval over a persistent vector store.

The store is instantiated twice by the pipeline: once over abstracts and
once over full-text chunks. Search is an exact linear scan (contiguous
float32 storage, float64 scoring), which at the corpus scales this tool
targets (low tens of thousands of entries) is fast enough and keeps
results bit-for-bit comparable with a brute-force oracle. Ties are broken
by ascending entry id so rankings are reproducible.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"VLST"
FORMAT_VERSION = 1

KIND_ABSTRACT = "abstract"
KIND_CHUNK = "chunk"
_KIND_CODES = {KIND_ABSTRACT: 0, KIND_CHUNK: 1}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}

_HEADER = struct.Struct("<4sBIQ")


class VectorStoreError(RuntimeError):
    """Base class for store failures."""


class DimensionMismatchError(VectorStoreError):
    """Vector dimension differs from the store or query dimension."""


class ZeroVectorError(VectorStoreError):
    """Cosine distance is undefined for a zero vector."""


class StoreFormatError(VectorStoreError):
    """Persisted file is corrupt; message carries the byte offset."""


def cosine_distance(a, b) -> float:
    """1 - (a.b)/(|a||b|), computed in double precision.

    Symmetric; 0 for identical directions, 1 for orthogonal vectors,
    2 for opposite directions (up to floating error).

    Raises:
        DimensionMismatchError: shapes differ.
        ZeroVectorError: either vector has zero norm.
    """
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVectorError("cosine distance is undefined for a zero vector")
    return float(1.0 - np.dot(va, vb) / (norm_a * norm_b))


@dataclass(frozen=True)
class DatastoreEntry:
    """One stored text with its vector; (pub_id, kind, chunk_index) is unique."""

    entry_id: str
    pub_id: str
    kind: str
    chunk_index: int
    vector: np.ndarray
    text: str


@dataclass(frozen=True)
class ScoredEntry:
    entry: DatastoreEntry
    distance: float


class VectorStore:
    """In-memory vector collection with exact cosine search and a binary file format."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self._entries: dict[str, DatastoreEntry] = {}
        self._id_by_key: dict[tuple[str, str, int], str] = {}
        self._matrix: np.ndarray | None = None
        self._norms: np.ndarray | None = None
        self._order: list[str] = []

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> list[DatastoreEntry]:
        return list(self._entries.values())

    def get(self, entry_id: str) -> DatastoreEntry | None:
        return self._entries.get(entry_id)

    def insert(self, entry: DatastoreEntry) -> None:
        """Insert or atomically replace; both entry_id and the logical key upsert."""
        if entry.kind not in _KIND_CODES:
            raise ValueError(f"unknown entry kind {entry.kind!r}")
        vector = np.asarray(entry.vector, dtype=np.float32)
        if vector.ndim != 1 or vector.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"entry {entry.entry_id!r} has dimension {vector.shape}, store expects {self.dim}"
            )
        key = (entry.pub_id, entry.kind, entry.chunk_index)
        stale_id = self._id_by_key.get(key)
        if stale_id is not None and stale_id != entry.entry_id:
            del self._entries[stale_id]
        existing = self._entries.get(entry.entry_id)
        if existing is not None:
            old_key = (existing.pub_id, existing.kind, existing.chunk_index)
            self._id_by_key.pop(old_key, None)
        self._entries[entry.entry_id] = DatastoreEntry(
            entry_id=entry.entry_id,
            pub_id=entry.pub_id,
            kind=entry.kind,
            chunk_index=entry.chunk_index,
            vector=vector,
            text=entry.text,
        )
        self._id_by_key[key] = entry.entry_id
        self._matrix = None

    def _scan_arrays(self):
        if self._matrix is None:
            self._order = list(self._entries)
            if self._order:
                self._matrix = np.stack(
                    [self._entries[eid].vector for eid in self._order]
                ).astype(np.float64)
                self._norms = np.linalg.norm(self._matrix, axis=1)
            else:
                self._matrix = np.zeros((0, self.dim), dtype=np.float64)
                self._norms = np.zeros(0, dtype=np.float64)
        return self._matrix, self._norms, self._order

    def top_k(self, query, k: int, t: float = 2.0, pub_ids=None) -> list[ScoredEntry]:
        """Exact thresholded top-k by cosine distance.

        Returns at most k entries with distance <= t, optionally restricted
        to the given publication ids, sorted by (distance, entry_id)
        ascending. Identical to a brute-force scan by construction.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if not 0.0 <= t <= 2.0:
            raise ValueError(f"threshold must be in [0, 2], got {t}")
        q = np.asarray(query, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self.dim:
            raise DimensionMismatchError(f"query has shape {q.shape}, store expects dim {self.dim}")
        q_norm = float(np.linalg.norm(q))
        if q_norm == 0.0:
            raise ZeroVectorError("cannot search with a zero query vector")
        matrix, norms, order = self._scan_arrays()
        if not order:
            return []
        allowed = None if pub_ids is None else set(pub_ids)
        distances = 1.0 - (matrix @ q) / (norms * q_norm)
        candidates = []
        for idx, entry_id in enumerate(order):
            distance = float(distances[idx])
            if distance > t:
                continue
            entry = self._entries[entry_id]
            if allowed is not None and entry.pub_id not in allowed:
                continue
            candidates.append((distance, entry_id))
        candidates.sort()
        return [
            ScoredEntry(entry=self._entries[entry_id], distance=distance)
            for distance, entry_id in candidates[:k]
        ]

    # -- persistence ---------------------------------------------------

    def save(self, path) -> None:
        """Write the store; the file round-trips bit-exactly through load."""
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "wb") as out:
            out.write(_HEADER.pack(MAGIC, FORMAT_VERSION, self.dim, len(self._entries)))
            for entry in self._entries.values():
                _write_record(out, entry)
            out.flush()
            os.fsync(out.fileno())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "VectorStore":
        """Read a persisted store.

        Raises:
            StoreFormatError: bad magic/version or truncated/corrupt
                records, with the byte offset of the failure.
        """
        with open(path, "rb") as handle:
            data = handle.read()
        if len(data) < _HEADER.size:
            raise StoreFormatError(f"file too short for header at byte offset {len(data)}")
        magic, version, dim, count = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise StoreFormatError(f"bad magic {magic!r} at byte offset 0")
        if version != FORMAT_VERSION:
            raise StoreFormatError(f"unsupported format version {version} at byte offset 4")
        store = cls(dim=dim)
        offset = _HEADER.size
        for _ in range(count):
            entry, offset = _read_record(data, offset, dim)
            store.insert(entry)
        if offset != len(data):
            raise StoreFormatError(f"{len(data) - offset} trailing bytes at byte offset {offset}")
        return store


def _write_record(out, entry: DatastoreEntry) -> None:
    for text in (entry.entry_id, entry.pub_id):
        raw = text.encode("utf-8")
        out.write(struct.pack("<I", len(raw)))
        out.write(raw)
    out.write(struct.pack("<BI", _KIND_CODES[entry.kind], entry.chunk_index))
    out.write(np.asarray(entry.vector, dtype="<f4").tobytes())
    raw = entry.text.encode("utf-8")
    out.write(struct.pack("<I", len(raw)))
    out.write(raw)


def _take(data: bytes, offset: int, length: int) -> tuple[bytes, int]:
    if offset + length > len(data):
        raise StoreFormatError(f"truncated record at byte offset {offset}")
    return data[offset : offset + length], offset + length


def _read_record(data: bytes, offset: int, dim: int) -> tuple[DatastoreEntry, int]:
    fields = []
    for _ in range(2):
        raw, offset = _take(data, offset, 4)
        (length,) = struct.unpack("<I", raw)
        raw, offset = _take(data, offset, length)
        fields.append(raw.decode("utf-8"))
    raw, offset = _take(data, offset, 5)
    kind_code, chunk_index = struct.unpack("<BI", raw)
    if kind_code not in _CODE_KINDS:
        raise StoreFormatError(f"unknown kind code {kind_code} at byte offset {offset - 5}")
    raw, offset = _take(data, offset, 4 * dim)
    vector = np.frombuffer(raw, dtype="<f4").copy()
    raw, offset = _take(data, offset, 4)
    (length,) = struct.unpack("<I", raw)
    raw, offset = _take(data, offset, length)
    entry = DatastoreEntry(
        entry_id=fields[0],
        pub_id=fields[1],
        kind=_CODE_KINDS[kind_code],
        chunk_index=chunk_index,
        vector=vector,
        text=raw.decode("utf-8"),
    )
    return entry, offset


def persist(store: VectorStore, path) -> None:
    """Module-level alias for :meth:`VectorStore.save`."""
    store.save(path)


def open_store(path) -> VectorStore:
    """Module-level alias for :meth:`VectorStore.load`."""
    return VectorStore.load(path)
