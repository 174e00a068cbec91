"""Extraction methods over a publication corpus.

Four methods share one surface: ``zero_shot`` queries the responder with no
retrieved context; ``rag_abstracts`` and ``rag_fulltext`` are single-stage
retrieval baselines over the abstract and full-text chunk datastores; and
``villa`` is the two-stage method, which first selects publications by
abstract similarity and then retrieves chunks per selected publication,
querying the responder once per publication and taking the union of the
extracted mutations.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .corpus import Publication, chunk_text
from .embedding import EmbedderBase, ROLE_DOCUMENT, ROLE_QUERY
from .mutation import Mutation, MutationParseError, parse_mutation
from .responders import CONTEXT_HEADER, Responder, ResponderError
from .vectorstore import KIND_ABSTRACT, KIND_CHUNK, DatastoreEntry, ScoredEntry, VectorStore

logger = logging.getLogger(__name__)

CONTEXT_SEPARATOR = "\n\n---\n\n"

METHOD_ZERO_SHOT = "zero-shot"
METHOD_RAG_ABSTRACTS = "rag-abstracts"
METHOD_RAG_FULLTEXT = "rag-fulltext"
METHOD_VILLA = "villa"
METHODS = (METHOD_ZERO_SHOT, METHOD_RAG_ABSTRACTS, METHOD_RAG_FULLTEXT, METHOD_VILLA)

QUERY_FULL_PROMPT = "full_prompt"
QUERY_SHORT = "short"

_PLACEHOLDERS = ("{virus}", "{protein}", "{context}")

_TASK_BODY = (
    "You are an expert virologist performing literature curation.\n"
    "Identify amino-acid mutations in the {protein} protein of {virus} that"
    " modify the interaction between the virus and its host.\n"
    "Respond with a JSON object containing two fields: \"mutations\", a list"
    " of mutation strings written as <original amino acid><position><changed"
    " amino acid> (for example A123C), and \"reasoning\", a string describing"
    " the effect of each mutation on the virus-host interaction."
)

DEFAULT_ZERO_SHOT_TEMPLATE_BODY = _TASK_BODY

DEFAULT_RAG_TEMPLATE_BODY = (
    _TASK_BODY
    + "\nExtract the mutations only from the contextual information provided"
    " below; do not rely on prior knowledge. If the context contains no"
    " relevant mutations, return an empty list.\n\n"
    + CONTEXT_HEADER
    + "\n{context}"
)


class TemplateError(ValueError):
    """A prompt template violates its mode's placeholder contract."""


class MalformedResponseError(ValueError):
    """No JSON object with a mutations array and reasoning string was found."""


@dataclass(frozen=True)
class PromptTemplate:
    """Prompt text with {virus}, {protein} and, in rag mode, one {context}."""

    template_id: str
    body: str
    mode: str  # "zero_shot" | "rag"

    def __post_init__(self):
        if self.mode not in ("zero_shot", "rag"):
            raise TemplateError(f"unknown template mode {self.mode!r}")
        occurrences = self.body.count("{context}")
        if self.mode == "zero_shot" and occurrences:
            raise TemplateError(f"template {self.template_id!r}: zero_shot templates must not contain {{context}}")
        if self.mode == "rag" and occurrences != 1:
            raise TemplateError(
                f"template {self.template_id!r}: rag templates must contain {{context}} exactly once, found {occurrences}"
            )

    @classmethod
    def from_file(cls, path) -> "PromptTemplate":
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
        return cls(template_id=raw["template_id"], body=raw["body"], mode=raw["mode"])


def default_template(mode: str) -> PromptTemplate:
    if mode == "zero_shot":
        return PromptTemplate("default-zero-shot", DEFAULT_ZERO_SHOT_TEMPLATE_BODY, "zero_shot")
    return PromptTemplate("default-rag", DEFAULT_RAG_TEMPLATE_BODY, "rag")


@dataclass(frozen=True)
class ContextPiece:
    pub_id: str
    text: str
    distance: float


@dataclass(frozen=True)
class Context:
    """Retrieved text pieces ordered by increasing distance."""

    pieces: tuple[ContextPiece, ...] = ()

    def __post_init__(self):
        distances = [piece.distance for piece in self.pieces]
        if distances != sorted(distances):
            raise ValueError("context pieces must be sorted by ascending distance")

    @classmethod
    def from_scored(cls, scored: list[ScoredEntry]) -> "Context":
        return cls(
            pieces=tuple(
                ContextPiece(pub_id=item.entry.pub_id, text=item.entry.text, distance=item.distance)
                for item in scored
            )
        )

    @property
    def rendered(self) -> str:
        return CONTEXT_SEPARATOR.join(f"[{piece.pub_id}] {piece.text}" for piece in self.pieces)

    @property
    def pub_ids(self) -> set[str]:
        return {piece.pub_id for piece in self.pieces}


def render_prompt(template: PromptTemplate, virus: str, protein: str, context: Context | None = None) -> str:
    """Substitute placeholders; the template mode must match context presence."""
    if template.mode == "zero_shot" and context is not None:
        raise TemplateError("zero_shot template does not accept a context")
    if template.mode == "rag" and context is None:
        raise TemplateError("rag template requires a context (possibly empty)")
    rendered = template.body.replace("{virus}", virus).replace("{protein}", protein)
    if template.mode == "rag":
        rendered = rendered.replace("{context}", context.rendered)
    for placeholder in _PLACEHOLDERS:
        if placeholder in rendered:
            raise TemplateError(f"unresolved placeholder {placeholder} after rendering")
    return rendered


@dataclass
class RetrievalConfig:
    """Knobs of the retrieval stages.

    k_a and k_c bound the two stages of the two-stage method; k bounds the
    single-stage baselines. t is the cosine-distance threshold, applied at
    the first (and single-stage) level; t_level2, when set, overrides it
    for per-publication chunk retrieval.
    """

    k_a: int = 160
    k_c: int = 160
    k: int = 150
    t: float = 0.5
    t_level2: float | None = None
    query_mode: str = QUERY_FULL_PROMPT
    jobs: int = 1

    def __post_init__(self):
        for name in ("k_a", "k_c", "k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("t", "t_level2"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 2.0:
                raise ValueError(f"{name} must be in [0, 2], got {value}")
        if self.query_mode not in (QUERY_FULL_PROMPT, QUERY_SHORT):
            raise ValueError(f"unknown query_mode {self.query_mode!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    @property
    def level2_threshold(self) -> float:
        return self.t if self.t_level2 is None else self.t_level2


@dataclass
class PerPublicationResult:
    """Outcome of one per-publication responder call in the two-stage method."""

    pub_id: str
    mutations: set[Mutation] = field(default_factory=set)
    reasoning: str = ""
    raw_response: str = ""
    rejects: list[str] = field(default_factory=list)
    error: str | None = None


@dataclass
class ExtractionResult:
    """One method's answer for one (virus, protein) query."""

    protein: str
    virus: str
    method: str
    mutations: set[Mutation] = field(default_factory=set)
    reasoning: str = ""
    raw_response: str = ""
    context_pub_ids: set[str] = field(default_factory=set)
    per_publication: list[PerPublicationResult] | None = None
    rejects: list[str] = field(default_factory=list)
    error: str | None = None


def parse_response(raw: str) -> tuple[set[Mutation], str, list[str]]:
    """Extract (mutations, reasoning, rejects) from a responder reply.

    Scans for the first well-formed JSON object carrying a "mutations"
    array and a "reasoning" string; the object may be the entire reply or
    embedded in prose or a fenced code block. Array items that fail the
    substitution grammar are returned in ``rejects`` rather than raised.

    Raises:
        MalformedResponseError: no such JSON object exists in the reply.
    """
    decoder = json.JSONDecoder()
    payload = None
    index = raw.find("{")
    while index != -1:
        try:
            candidate, _ = decoder.raw_decode(raw, index)
        except ValueError:
            candidate = None
        if (
            isinstance(candidate, dict)
            and isinstance(candidate.get("mutations"), list)
            and isinstance(candidate.get("reasoning"), str)
        ):
            payload = candidate
            break
        index = raw.find("{", index + 1)
    if payload is None:
        raise MalformedResponseError("no JSON object with a 'mutations' array and 'reasoning' string found")
    mutations: set[Mutation] = set()
    rejects: list[str] = []
    for item in payload["mutations"]:
        if not isinstance(item, str):
            rejects.append(json.dumps(item))
            continue
        try:
            mutations.add(parse_mutation(item))
        except MutationParseError:
            rejects.append(item)
    return mutations, payload["reasoning"], rejects


def retrieval_query(template: PromptTemplate, virus: str, protein: str, query_mode: str) -> str:
    """Text embedded to drive retrieval.

    full_prompt mode embeds the rendered prompt itself (with an empty
    context block for rag templates); short mode embeds a terse query.
    """
    if query_mode == QUERY_SHORT:
        return f"mutations in {protein} of {virus}"
    if template.mode == "rag":
        return render_prompt(template, virus, protein, Context())
    return render_prompt(template, virus, protein)


def _apply_response(result: ExtractionResult, raw: str) -> ExtractionResult:
    result.raw_response = raw
    try:
        mutations, reasoning, rejects = parse_response(raw)
    except MalformedResponseError as exc:
        result.error = str(exc)
        return result
    result.mutations = mutations
    result.reasoning = reasoning
    result.rejects = rejects
    return result


def zero_shot(responder: Responder, template: PromptTemplate, virus: str, protein: str) -> ExtractionResult:
    """Query the responder from parametric knowledge alone."""
    prompt = render_prompt(template, virus, protein)
    raw = responder.respond(prompt)
    result = ExtractionResult(protein=protein, virus=virus, method=METHOD_ZERO_SHOT)
    return _apply_response(result, raw)


def _single_stage(
    method: str,
    embedder: EmbedderBase,
    responder: Responder,
    store: VectorStore,
    cfg: RetrievalConfig,
    template: PromptTemplate,
    virus: str,
    protein: str,
) -> ExtractionResult:
    query = retrieval_query(template, virus, protein, cfg.query_mode)
    query_vector = embedder.embed(query, role=ROLE_QUERY)
    scored = store.top_k(query_vector, k=cfg.k, t=cfg.t)
    context = Context.from_scored(scored)
    prompt = render_prompt(template, virus, protein, context)
    raw = responder.respond(prompt)
    result = ExtractionResult(
        protein=protein,
        virus=virus,
        method=method,
        context_pub_ids=context.pub_ids,
    )
    return _apply_response(result, raw)


def rag_abstracts(embedder, responder, store_abstracts, cfg, template, virus, protein) -> ExtractionResult:
    """Single-stage retrieval over whole abstracts."""
    return _single_stage(METHOD_RAG_ABSTRACTS, embedder, responder, store_abstracts, cfg, template, virus, protein)


def rag_fulltext(embedder, responder, store_fulltext, cfg, template, virus, protein) -> ExtractionResult:
    """Single-stage retrieval over full-text chunks."""
    return _single_stage(METHOD_RAG_FULLTEXT, embedder, responder, store_fulltext, cfg, template, virus, protein)


def villa(
    embedder: EmbedderBase,
    responder: Responder,
    store_abstracts: VectorStore,
    store_fulltext: VectorStore,
    cfg: RetrievalConfig,
    template: PromptTemplate,
    virus: str,
    protein: str,
) -> ExtractionResult:
    """Two-stage extraction.

    Level 1 retrieves the k_a nearest abstracts within threshold t. Level 2
    retrieves, for each selected publication, its k_c nearest chunks and
    queries the responder once per publication; the final mutation set is
    the union over publications. A responder failure for one publication is
    recorded in that publication's slot and does not abort the run.
    """
    query = retrieval_query(template, virus, protein, cfg.query_mode)
    query_vector = embedder.embed(query, role=ROLE_QUERY)
    level1 = store_abstracts.top_k(query_vector, k=cfg.k_a, t=cfg.t)
    selected: list[str] = []
    for item in level1:
        if item.entry.pub_id not in selected:
            selected.append(item.entry.pub_id)

    def run_one(pub_id: str) -> PerPublicationResult:
        slot = PerPublicationResult(pub_id=pub_id)
        scored = store_fulltext.top_k(
            query_vector, k=cfg.k_c, t=cfg.level2_threshold, pub_ids={pub_id}
        )
        context = Context.from_scored(scored)
        prompt = render_prompt(template, virus, protein, context)
        try:
            slot.raw_response = responder.respond(prompt)
        except ResponderError as exc:
            slot.error = str(exc)
            logger.warning("responder failed for publication %s: %s", pub_id, exc)
            return slot
        try:
            slot.mutations, slot.reasoning, slot.rejects = parse_response(slot.raw_response)
        except MalformedResponseError as exc:
            slot.error = str(exc)
        return slot

    if cfg.jobs > 1 and len(selected) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            per_publication = list(pool.map(run_one, selected))
    else:
        per_publication = [run_one(pub_id) for pub_id in selected]

    mutations: set[Mutation] = set()
    rejects: list[str] = []
    reasonings: list[str] = []
    for slot in per_publication:
        mutations.update(slot.mutations)
        rejects.extend(slot.rejects)
        if slot.reasoning:
            reasonings.append(f"[{slot.pub_id}] {slot.reasoning}")
    return ExtractionResult(
        protein=protein,
        virus=virus,
        method=METHOD_VILLA,
        mutations=mutations,
        reasoning="\n".join(reasonings),
        raw_response="",
        context_pub_ids=set(selected),
        per_publication=per_publication,
        rejects=rejects,
    )


def run_method(
    method: str,
    embedder,
    responder,
    store_abstracts,
    store_fulltext,
    cfg: RetrievalConfig,
    virus: str,
    protein: str,
    template: PromptTemplate | None = None,
) -> ExtractionResult:
    """Dispatch one extraction by method name (see METHODS)."""
    if method == METHOD_ZERO_SHOT:
        return zero_shot(responder, template or default_template("zero_shot"), virus, protein)
    template = template or default_template("rag")
    if method == METHOD_RAG_ABSTRACTS:
        return rag_abstracts(embedder, responder, store_abstracts, cfg, template, virus, protein)
    if method == METHOD_RAG_FULLTEXT:
        return rag_fulltext(embedder, responder, store_fulltext, cfg, template, virus, protein)
    if method == METHOD_VILLA:
        return villa(embedder, responder, store_abstracts, store_fulltext, cfg, template, virus, protein)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def build_datastores(
    corpus: list[Publication],
    embedder: EmbedderBase,
    chunk_size: int = 1000,
    chunk_overlap: int = 100,
    abstract_limit: int = 5000,
) -> tuple[VectorStore, VectorStore, list[str]]:
    """Initialize the abstract and full-text datastores from a corpus.

    Each publication contributes one abstract entry (abstracts are never
    chunked; over-long abstracts are stored whole with a warning) and one
    entry per full-text chunk.
    """
    store_abstracts = VectorStore(dim=embedder.dim)
    store_fulltext = VectorStore(dim=embedder.dim)
    warnings: list[str] = []

    abstracts = [pub.abstract for pub in corpus]
    for pub, vector in zip(corpus, embedder.embed_batch(abstracts, role=ROLE_DOCUMENT)):
        if len(pub.abstract) > abstract_limit:
            message = (
                f"abstract of {pub.pub_id} has {len(pub.abstract)} characters,"
                f" above the {abstract_limit}-character limit; stored whole"
            )
            warnings.append(message)
            logger.warning(message)
        store_abstracts.insert(
            DatastoreEntry(
                entry_id=f"{pub.pub_id}#abstract",
                pub_id=pub.pub_id,
                kind=KIND_ABSTRACT,
                chunk_index=0,
                vector=vector,
                text=pub.abstract,
            )
        )

    all_chunks = []
    for pub in corpus:
        all_chunks.extend(chunk_text(pub.full_text, chunk_size, chunk_overlap, pub_id=pub.pub_id))
    chunk_vectors = embedder.embed_batch([chunk.text for chunk in all_chunks], role=ROLE_DOCUMENT)
    for chunk, vector in zip(all_chunks, chunk_vectors):
        store_fulltext.insert(
            DatastoreEntry(
                entry_id=f"{chunk.pub_id}#chunk{chunk.chunk_index:05d}",
                pub_id=chunk.pub_id,
                kind=KIND_CHUNK,
                chunk_index=chunk.chunk_index,
                vector=vector,
                text=chunk.text,
            )
        )
    return store_abstracts, store_fulltext, warnings
