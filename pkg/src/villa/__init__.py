"""Two-stage retrieval-augmented extraction of viral mutations from literature."""

from .corpus import (
    Chunk,
    CorpusError,
    GroundTruthDataset,
    GroundTruthError,
    Publication,
    chunk_text,
    ground_truth_for_protein,
    load_corpus,
    load_ground_truth,
)
from .embedding import MockEmbedder, RemoteEmbedder, embed, embed_batch
from .evaluation import (
    Metrics,
    RunScores,
    abstract_distance_analysis,
    aggregate,
    context_metrics,
    context_restricted_truth,
    mann_whitney_u,
    score_run,
    set_metrics,
    summarize,
    sweep,
)
from .mutation import Mutation, MutationParseError, normalize, parse_mutation
from .pipeline import (
    Context,
    ExtractionResult,
    PromptTemplate,
    RetrievalConfig,
    build_datastores,
    default_template,
    parse_response,
    rag_abstracts,
    rag_fulltext,
    render_prompt,
    run_method,
    villa,
    zero_shot,
)
from .responders import EmptyResponder, OracleResponder, RemoteResponder, ScriptedResponder
from .vectorstore import (
    DatastoreEntry,
    ScoredEntry,
    VectorStore,
    cosine_distance,
    open_store,
    persist,
)

__version__ = "0.1.0"
