"""Document relevance scoring and the human-curated selection set.

The score combines how much retained-term mass a document carries with
how close its embedding sits to the centroid of the retained terms:

    score(d) = term_mass(d) * max(floor, centroid_similarity(d))

term_mass is the sum of min_npmi over retained terms matched in d. The
floor keeps documents with missing or degenerate embeddings visible to
the human reviewer instead of silently zeroing them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .corpus import DocumentStore
from .embeddings import Embedding, EmbeddingError, EmbeddingProvider, embed_document

log = logging.getLogger(__name__)

CENTROID_FLOOR = 0.1


@dataclass(frozen=True)
class RelevanceScore:
    doc_id: str
    score: float
    term_mass: float
    centroid_sim: float
    flagged: bool = False


class Provenance(str, Enum):
    AUTO_TOPK = "auto_topk"
    HUMAN_ADDED = "human_added"


@dataclass(frozen=True)
class SelectionEntry:
    doc_id: str
    provenance: Provenance
    timestamp: str = ""  # ISO-8601; empty for reproducible auto entries


@dataclass(frozen=True)
class SelectionSet:
    entries: tuple

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.doc_id in seen:
                raise ValueError(f"duplicate selection entry {e.doc_id!r}")
            seen.add(e.doc_id)

    def doc_ids(self) -> list:
        return [e.doc_id for e in self.entries]

    def __contains__(self, doc_id: str) -> bool:
        return any(e.doc_id == doc_id for e in self.entries)

    def __len__(self):
        return len(self.entries)


def _centroid(term_embeddings: dict):
    if not term_embeddings:
        return None
    mat = np.stack([term_embeddings[t].values for t in sorted(term_embeddings)])
    c = mat.mean(axis=0)
    norm = float(np.linalg.norm(c))
    if norm == 0.0:
        return None
    return c / norm


def score_documents(
    slices: dict,
    term_scores,
    term_embeddings: dict,
    provider: EmbeddingProvider,
    store: DocumentStore,
) -> list:
    """Score every document in the retrieved slices, descending.

    Documents whose embedding cannot be produced are scored with the
    centroid factor at the floor and flagged for the reviewer.
    """
    scores = list(term_scores.scores if hasattr(term_scores, "scores") else term_scores)
    npmi_by_term = {t.term_id: t.min_npmi for t in scores}
    centroid = _centroid(
        {t: e for t, e in term_embeddings.items() if t in npmi_by_term}
    )

    out = []
    doc_ids = sorted(set().union(*(s.doc_ids for s in slices.values())))
    for doc_id in doc_ids:
        doc = store.get(doc_id)
        term_mass = sum(
            npmi_by_term[t] for t in doc.matched_terms if t in npmi_by_term
        )
        sim = 0.0
        flagged = False
        if centroid is None:
            flagged = True
        else:
            try:
                emb = embed_document(provider, doc)
                norm = float(np.linalg.norm(emb.values))
                if norm == 0.0:
                    raise EmbeddingError("zero document embedding")
                sim = float(np.dot(emb.values, centroid)) / norm
            except EmbeddingError as exc:
                log.warning("no embedding for %s: %s", doc_id, exc)
                flagged = True
        factor = max(CENTROID_FLOOR, sim)
        out.append(
            RelevanceScore(
                doc_id=doc_id,
                score=term_mass * factor,
                term_mass=term_mass,
                centroid_sim=sim,
                flagged=flagged,
            )
        )
    out.sort(key=lambda r: (-r.score, r.doc_id))
    return out


def select(scores: list, k: int) -> SelectionSet:
    """Top-k scored documents as the initial machine-proposed selection."""
    if k < 1:
        raise ValueError("k must be at least 1")
    entries = tuple(
        SelectionEntry(r.doc_id, Provenance.AUTO_TOPK) for r in scores[:k]
    )
    return SelectionSet(entries)


def amend_selection(
    selection: SelectionSet,
    store: DocumentStore,
    add: str = "",
    remove: str = "",
    timestamp: str = "",
) -> SelectionSet:
    """Apply one human amendment; repeating the same amendment is a no-op
    for adds, while removing a non-member is an error."""
    if bool(add) == bool(remove):
        raise ValueError("exactly one of add/remove is required")
    if add:
        if add not in store:
            raise ValueError(f"unknown document id {add!r}")
        if add in selection:
            return selection
        entry = SelectionEntry(add, Provenance.HUMAN_ADDED, timestamp)
        return SelectionSet(selection.entries + (entry,))
    if remove not in selection:
        raise ValueError(f"document {remove!r} is not in the selection")
    return SelectionSet(
        tuple(e for e in selection.entries if e.doc_id != remove)
    )


def selection_to_json(selection: SelectionSet) -> list:
    return [
        {
            "doc_id": e.doc_id,
            "provenance": e.provenance.value,
            "timestamp": e.timestamp,
        }
        for e in selection.entries
    ]


def selection_from_json(items: list) -> SelectionSet:
    return SelectionSet(
        tuple(
            SelectionEntry(
                i["doc_id"], Provenance(i["provenance"]), i.get("timestamp", "")
            )
            for i in items
        )
    )
