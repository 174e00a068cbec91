"""Publication corpus loading, ground-truth loading, and text chunking.

The corpus file is line-delimited JSON, one object per publication with
``pub_id``, ``abstract``, ``full_text`` and an optional ``title``. The
ground truth is a CSV with header ``protein,mutation,pub_id``, one
(protein, mutation, supporting publication) triple per row.

Chunking is character-based: a "token" is one character throughout, so
offsets are deterministic and count Unicode scalar values, not bytes.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .mutation import Mutation, MutationParseError, parse_mutation

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """A corpus file violates the record schema."""


class GroundTruthError(ValueError):
    """A ground-truth file violates the triple schema."""


@dataclass(frozen=True)
class Publication:
    pub_id: str
    abstract: str
    full_text: str
    title: str = ""


@dataclass(frozen=True)
class Chunk:
    """A contiguous character window of one publication's full text.

    Consecutive chunks overlap by exactly the configured overlap, except
    possibly the final chunk, which is the remaining tail.
    """

    pub_id: str
    chunk_index: int
    start_offset: int
    text: str


def load_corpus(path) -> list[Publication]:
    """Load a line-delimited JSON corpus, preserving file order.

    Raises:
        CorpusError: missing/empty field (with line number) or duplicate
            pub_id (naming both lines).
        FileNotFoundError: path does not exist.
    """
    publications: list[Publication] = []
    first_line_of: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"line {lineno}: record must be a JSON object")
            for name in ("pub_id", "abstract", "full_text"):
                if name not in record:
                    raise CorpusError(f"line {lineno}: missing field {name!r}")
            pub_id = str(record["pub_id"])
            if not pub_id:
                raise CorpusError(f"line {lineno}: empty pub_id")
            if not record["abstract"]:
                raise CorpusError(f"line {lineno}: empty abstract for pub_id {pub_id!r}")
            if pub_id in first_line_of:
                raise CorpusError(
                    f"duplicate pub_id {pub_id!r} on lines {first_line_of[pub_id]} and {lineno}"
                )
            first_line_of[pub_id] = lineno
            publications.append(
                Publication(
                    pub_id=pub_id,
                    abstract=str(record["abstract"]),
                    full_text=str(record["full_text"]),
                    title=str(record.get("title", "")),
                )
            )
    return publications


def chunk_text(text: str, size: int, overlap: int, pub_id: str = "") -> list[Chunk]:
    """Split text into overlapping character windows.

    Window starts are 0, size-overlap, 2*(size-overlap), ...; the final
    chunk is the remaining tail. Every character of the input belongs to
    at least one chunk, and no trailing chunk is emitted once a window
    has reached the end of the text.

    Raises:
        ValueError: if size < 1 or not 0 <= overlap < size.
    """
    if size < 1:
        raise ValueError(f"chunk size must be >= 1, got {size}")
    if overlap < 0 or overlap >= size:
        raise ValueError(f"overlap must satisfy 0 <= overlap < size, got overlap={overlap} size={size}")
    chunks: list[Chunk] = []
    if not text:
        return chunks
    stride = size - overlap
    start = 0
    index = 0
    while True:
        end = min(start + size, len(text))
        chunks.append(Chunk(pub_id=pub_id, chunk_index=index, start_offset=start, text=text[start:end]))
        if end == len(text):
            break
        start += stride
        index += 1
    return chunks


@dataclass
class GroundTruthDataset:
    """Expert-curated (protein, mutation, publication) attributions.

    ``attributions`` maps protein name -> mutation -> set of supporting
    publication ids. Every mutation is attributed to at least one
    publication by construction of :func:`load_ground_truth`.
    """

    attributions: dict[str, dict[Mutation, set[str]]] = field(default_factory=dict)

    @property
    def proteins(self) -> list[str]:
        return list(self.attributions)

    def mutations_for(self, protein: str) -> set[Mutation]:
        return set(self.attributions.get(protein, {}))

    def pub_ids_for(self, protein: str) -> set[str]:
        pubs: set[str] = set()
        for supporting in self.attributions.get(protein, {}).values():
            pubs.update(supporting)
        return pubs

    def for_protein(self, protein: str) -> tuple[set[Mutation], set[str]]:
        """Stored (mutations, publication ids) for a protein.

        Unknown proteins yield two empty sets rather than an error, so a
        lookup miss is distinguishable from a malformed query.
        """
        return self.mutations_for(protein), self.pub_ids_for(protein)

    def add(self, protein: str, mutation: Mutation, pub_id: str) -> None:
        self.attributions.setdefault(protein, {}).setdefault(mutation, set()).add(pub_id)


def load_ground_truth(path, known_pub_ids=None) -> tuple[GroundTruthDataset, list[str]]:
    """Load the ground-truth CSV.

    Args:
        path: CSV file with header ``protein,mutation,pub_id``.
        known_pub_ids: optional collection of corpus publication ids; rows
            referencing ids outside it produce warnings (returned, and
            logged) but are kept.

    Returns:
        (dataset, warnings)

    Raises:
        GroundTruthError: bad header, missing values, or an unparseable
            mutation token, citing the offending row.
    """
    dataset = GroundTruthDataset()
    warnings: list[str] = []
    known = set(known_pub_ids) if known_pub_ids is not None else None
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            return dataset, warnings
        if [h.strip() for h in header] != ["protein", "mutation", "pub_id"]:
            raise GroundTruthError(
                f"expected header 'protein,mutation,pub_id', got {','.join(header)!r}"
            )
        for row in reader:
            if not row or not any(cell.strip() for cell in row):
                continue
            rownum = reader.line_num
            if len(row) != 3:
                raise GroundTruthError(f"row {rownum}: expected 3 columns, got {len(row)}")
            protein, mutation_text, pub_id = (cell.strip() for cell in row)
            if not protein or not pub_id:
                raise GroundTruthError(f"row {rownum}: empty protein or pub_id")
            try:
                mutation = parse_mutation(mutation_text)
            except MutationParseError as exc:
                raise GroundTruthError(f"row {rownum}: {exc}") from exc
            if known is not None and pub_id not in known:
                message = f"row {rownum}: pub_id {pub_id!r} not present in the corpus"
                warnings.append(message)
                logger.warning("%s: %s", path, message)
            dataset.add(protein, mutation, pub_id)
    return dataset, warnings


def ground_truth_for_protein(dataset: GroundTruthDataset, protein: str) -> tuple[set[Mutation], set[str]]:
    """Module-level alias for :meth:`GroundTruthDataset.for_protein`."""
    return dataset.for_protein(protein)
