"""Per-genre nPMI scoring of thesaurus terms against a retrieved corpus.

For each genre the contingency is between "document contains the term"
and "document is in the retrieved corpus", counted over all store
documents of that genre. A term is retained only when its nPMI is
positive in every covered genre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import (
    And,
    CorpusSlice,
    DocumentStore,
    Genre,
    Or,
    Phrase,
    QueryNode,
    Thesaurus,
    match_thesaurus,
    stemmed_tokens,
)

GENRE_ORDER = (Genre.NEWS, Genre.SCIENCE, Genre.PATENTS)


@dataclass(frozen=True)
class GenreCounts:
    genre: Genre
    n_total: int
    n_term: int
    n_corpus: int
    n_joint: int

    def __post_init__(self):
        if min(self.n_total, self.n_term, self.n_corpus, self.n_joint) < 0:
            raise ValueError("counts must be non-negative")
        if self.n_joint > min(self.n_term, self.n_corpus):
            raise ValueError(
                f"n_joint {self.n_joint} exceeds a marginal "
                f"(n_term={self.n_term}, n_corpus={self.n_corpus})"
            )
        if max(self.n_term, self.n_corpus) > self.n_total:
            raise ValueError("marginal count exceeds n_total")


def npmi(c: GenreCounts) -> float:
    """Normalized pointwise mutual information in [-1, 1].

    ln(p(t,Q) / (p(t) p(Q))) / (-ln p(t,Q)), with the limits -1 when the
    term and corpus never co-occur and +1 when they always do.
    """
    if c.n_total == 0 or c.n_term == 0 or c.n_corpus == 0:
        raise ValueError(f"undefined marginals: {c}")
    if c.n_joint == 0:
        return -1.0
    if c.n_joint == c.n_term == c.n_corpus:
        # p(t,Q) = p(t) = p(Q): perfect association, including the
        # p(t,Q) = 1 case where the denominator would vanish.
        return 1.0
    # Exact integer ratio keeps independence at precisely zero.
    ratio = (c.n_joint * c.n_total) / (c.n_term * c.n_corpus)
    value = math.log(ratio) / -math.log(c.n_joint / c.n_total)
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class TermScore:
    term_id: str
    npmi_by_genre: dict
    min_npmi: float
    newly_detected: bool


@dataclass
class ScoreResult:
    scores: list
    covered_genres: tuple
    partial: bool = False
    skipped_genres: tuple = field(default=())

    def __iter__(self):
        return iter(self.scores)

    def __len__(self):
        return len(self.scores)


def _query_phrases(query: QueryNode) -> list:
    if isinstance(query, Phrase):
        return [query.text]
    if isinstance(query, (And, Or)):
        out = []
        for child in query.children:
            out.extend(_query_phrases(child))
        return out
    raise TypeError(f"not a query node: {query!r}")


def score_terms(
    slices: dict,
    store: DocumentStore,
    thesaurus: Thesaurus,
    query: QueryNode,
) -> ScoreResult:
    """Score every thesaurus term; keep those positive in all covered genres.

    A genre whose slice is empty (or whose store total is zero) is
    skipped and the result is flagged partial, since positivity in that
    genre cannot be established.
    """
    for genre in GENRE_ORDER:
        if genre not in slices:
            raise ValueError(f"missing slice for genre {genre.value!r}")

    covered = []
    skipped = []
    for genre in GENRE_ORDER:
        s: CorpusSlice = slices[genre]
        if s.total_in_store == 0 or not s.doc_ids:
            skipped.append(genre)
        else:
            covered.append(genre)
    if not covered:
        return ScoreResult([], (), partial=True, skipped_genres=tuple(skipped))

    # One thesaurus pass per document; counts per (genre, term).
    n_term: dict = {g: {} for g in covered}
    n_joint: dict = {g: {} for g in covered}
    for doc in store.documents():
        if doc.genre not in n_term:
            continue
        terms = match_thesaurus(doc, thesaurus)
        in_slice = doc.id in slices[doc.genre].doc_ids
        for tid in terms:
            n_term[doc.genre][tid] = n_term[doc.genre].get(tid, 0) + 1
            if in_slice:
                n_joint[doc.genre][tid] = n_joint[doc.genre].get(tid, 0) + 1

    query_keys = {stemmed_tokens(p) for p in _query_phrases(query)}

    retained = []
    for tid, entry in thesaurus.entries.items():
        by_genre = {}
        for genre in covered:
            s = slices[genre]
            term_count = n_term[genre].get(tid, 0)
            if term_count == 0:
                by_genre = None
                break
            value = npmi(
                GenreCounts(
                    genre=genre,
                    n_total=s.total_in_store,
                    n_term=term_count,
                    n_corpus=len(s.doc_ids),
                    n_joint=n_joint[genre].get(tid, 0),
                )
            )
            if value <= 0.0:
                by_genre = None
                break
            by_genre[genre] = value
        if not by_genre:
            continue
        retained.append(
            TermScore(
                term_id=tid,
                npmi_by_genre=by_genre,
                min_npmi=min(by_genre.values()),
                newly_detected=stemmed_tokens(entry.label) not in query_keys,
            )
        )

    retained.sort(key=lambda t: (-t.min_npmi, t.term_id))
    return ScoreResult(
        retained,
        covered_genres=tuple(covered),
        partial=bool(skipped),
        skipped_genres=tuple(skipped),
    )


def top_new_terms(scores, k: int) -> list:
    """The k best newly detected terms by min_npmi, descending.

    Ties break lexicographically on term-id; fewer than k are returned
    when fewer qualify.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if isinstance(scores, ScoreResult):
        scores = scores.scores
    new = [t for t in scores if t.newly_detected]
    new.sort(key=lambda t: (-t.min_npmi, t.term_id))
    return new[:k]


def scores_to_tsv(result, thesaurus: Thesaurus) -> str:
    """Render scores as TSV: term-id, label, per-genre nPMI, min, flag."""
    scores = result.scores if isinstance(result, ScoreResult) else result
    lines = [
        "term_id\tlabel\tnpmi_news\tnpmi_science\tnpmi_patents\tmin_npmi\tnewly_detected"
    ]
    for t in scores:
        cells = [t.term_id, thesaurus.entries[t.term_id].label]
        for genre in GENRE_ORDER:
            v = t.npmi_by_genre.get(genre)
            cells.append("" if v is None else f"{v:.6f}")
        cells.append(f"{t.min_npmi:.6f}")
        cells.append("true" if t.newly_detected else "false")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
