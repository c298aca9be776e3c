"""Query-based knowledge-graph question answering pipeline.

Stages: BM25 candidate retrieval over entity/predicate catalogs,
chain-of-thought disambiguation (remote or oracle backends), SPARQL
generation, ontology-based filtering, local or remote execution, and
execution-match scoring with built-in rejection of unanswerable queries.
"""

__version__ = "0.1.0"

from kgqa.kgstore import (
    EntityRecord,
    PredicateRecord,
    Snapshot,
    Triple,
    get_entity_relations,
    load_snapshot,
    prune_by_degree,
)
from kgqa.retrieval import Bm25Index, Bm25Params, CandidateSet, recall_at_k, sweep

__all__ = [
    "Bm25Index",
    "Bm25Params",
    "CandidateSet",
    "EntityRecord",
    "PredicateRecord",
    "Snapshot",
    "Triple",
    "get_entity_relations",
    "load_snapshot",
    "prune_by_degree",
    "recall_at_k",
    "sweep",
    "__version__",
]
