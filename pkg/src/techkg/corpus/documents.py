"""Document store, thesaurus, and corpus retrieval.

Documents live in three genres (news, science, patents) and persist as
JSON lines; the in-memory index is rebuilt on load. Matching is stemmed
and contiguity is evaluated within a single field, never across the
title/abstract boundary.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .query import And, Or, Phrase, QueryNode
from .text import contains_phrase, stemmed_tokens

log = logging.getLogger(__name__)


class Genre(str, Enum):
    NEWS = "news"
    SCIENCE = "science"
    PATENTS = "patents"

    @classmethod
    def coerce(cls, value) -> "Genre":
        if isinstance(value, Genre):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown genre {value!r}; expected one of "
                f"{[g.value for g in cls]}"
            ) from None


@dataclass
class Document:
    id: str
    genre: Genre
    title: str
    date: dt.date
    abstract: Optional[str] = None
    matched_terms: set = field(default_factory=set)

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.title:
            raise ValueError(f"document {self.id!r}: title must be non-empty")
        self.genre = Genre.coerce(self.genre)
        if isinstance(self.date, str):
            self.date = dt.date.fromisoformat(self.date)
        if not isinstance(self.date, dt.date):
            raise ValueError(f"document {self.id!r}: bad date {self.date!r}")

    @classmethod
    def from_json(cls, obj: dict) -> "Document":
        """Build from a parsed JSON object; unknown fields are ignored."""
        try:
            return cls(
                id=obj["id"],
                genre=obj["genre"],
                title=obj["title"],
                date=obj["date"],
                abstract=obj.get("abstract") or None,
            )
        except KeyError as exc:
            raise ValueError(f"document record missing field {exc}") from None

    def to_json(self) -> dict:
        rec = {
            "id": self.id,
            "genre": self.genre.value,
            "title": self.title,
            "date": self.date.isoformat(),
        }
        if self.abstract:
            rec["abstract"] = self.abstract
        return rec

    def fields(self) -> tuple:
        """Stemmed token streams, one per populated field."""
        streams = [stemmed_tokens(self.title)]
        if self.abstract:
            streams.append(stemmed_tokens(self.abstract))
        return tuple(streams)


@dataclass(frozen=True)
class ThesaurusEntry:
    label: str
    description: str = ""
    aliases: tuple = ()

    def __post_init__(self):
        if not self.label:
            raise ValueError("thesaurus label must be non-empty")


@dataclass
class Thesaurus:
    entries: dict

    def __len__(self):
        return len(self.entries)

    def labels(self) -> dict:
        return {tid: e.label for tid, e in self.entries.items()}

    @classmethod
    def from_tsv(cls, path) -> "Thesaurus":
        """Load tab-separated rows: term-id, label, description, alias|alias."""
        entries = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise ValueError(
                    f"{path}:{lineno}: expected at least term-id and label"
                )
            tid = cols[0].strip()
            label = cols[1].strip()
            description = cols[2].strip() if len(cols) > 2 else ""
            raw_aliases = cols[3] if len(cols) > 3 else ""
            aliases = tuple(a.strip() for a in raw_aliases.split("|") if a.strip())
            if not tid:
                raise ValueError(f"{path}:{lineno}: empty term-id")
            if tid in entries:
                raise ValueError(f"{path}:{lineno}: duplicate term-id {tid!r}")
            entries[tid] = ThesaurusEntry(label, description, aliases)
        return cls(entries)


@dataclass(frozen=True)
class CorpusSlice:
    genre: Genre
    doc_ids: frozenset
    total_in_store: int

    def __post_init__(self):
        if self.total_in_store < len(self.doc_ids):
            raise ValueError(
                f"slice for {self.genre.value}: {len(self.doc_ids)} docs "
                f"exceed store total {self.total_in_store}"
            )


def match_document(doc: Document, query: QueryNode) -> bool:
    """Evaluate a query against a single document."""
    if isinstance(query, Phrase):
        phrase = stemmed_tokens(query.text)
        return any(contains_phrase(stream, phrase) for stream in doc.fields())
    if isinstance(query, And):
        return all(match_document(doc, child) for child in query.children)
    if isinstance(query, Or):
        return any(match_document(doc, child) for child in query.children)
    raise TypeError(f"not a query node: {query!r}")


def match_thesaurus(doc: Document, thesaurus: Thesaurus) -> set:
    """Term-ids whose stemmed label or alias occurs in the document.

    The result is also stored on doc.matched_terms.
    """
    streams = doc.fields()
    matched = set()
    for tid, entry in thesaurus.entries.items():
        for surface in (entry.label, *entry.aliases):
            needle = stemmed_tokens(surface)
            if any(contains_phrase(stream, needle) for stream in streams):
                matched.add(tid)
                break
    doc.matched_terms = matched
    return matched


class DocumentStore:
    """In-memory document index with optional JSONL persistence.

    Readers may run concurrently; ingestion takes the write lock. When
    backed by a file, every accepted document is appended immediately.
    """

    def __init__(self, path=None):
        self._docs: dict = {}
        self._lock = threading.RLock()
        self._path = Path(path) if path is not None else None
        if self._path is not None and self._path.exists():
            self._load()

    def _load(self):
        count = 0
        with self._path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    doc = Document.from_json(json.loads(line))
                except (json.JSONDecodeError, ValueError) as exc:
                    raise ValueError(f"{self._path}:{lineno}: {exc}") from None
                if doc.id in self._docs:
                    raise ValueError(
                        f"{self._path}:{lineno}: duplicate document id {doc.id!r}"
                    )
                self._docs[doc.id] = doc
                count += 1
        log.debug("loaded %d documents from %s", count, self._path)

    def __len__(self):
        return len(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def get(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise KeyError(f"no document with id {doc_id!r}") from None

    def documents(self) -> list:
        with self._lock:
            return list(self._docs.values())

    def genre_total(self, genre: Genre) -> int:
        genre = Genre.coerce(genre)
        return sum(1 for d in self._docs.values() if d.genre is genre)

    def add(self, doc: Document):
        with self._lock:
            if doc.id in self._docs:
                raise ValueError(f"duplicate document id {doc.id!r}")
            self._docs[doc.id] = doc
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(doc.to_json(), sort_keys=True) + "\n")

    def add_many(self, docs: Iterable) -> int:
        count = 0
        for doc in docs:
            self.add(doc)
            count += 1
        return count

    def ingest_jsonl(self, path) -> int:
        """Append documents from a JSONL file; returns the count added."""
        docs = []
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    docs.append(Document.from_json(json.loads(line)))
                except (json.JSONDecodeError, ValueError) as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        return self.add_many(docs)


def retrieve_corpus(
    store: DocumentStore,
    query: QueryNode,
    date_range: tuple,
) -> dict:
    """Per-genre slices of documents matching query within the date range.

    The range is inclusive on both ends; totals count every store
    document of the genre, matched or not.
    """
    start, end = date_range
    if isinstance(start, str):
        start = dt.date.fromisoformat(start)
    if isinstance(end, str):
        end = dt.date.fromisoformat(end)
    if start > end:
        raise ValueError(f"inverted date range: {start} > {end}")

    matched: dict = {g: set() for g in Genre}
    totals: dict = {g: 0 for g in Genre}
    for doc in store.documents():
        totals[doc.genre] += 1
        if start <= doc.date <= end and match_document(doc, query):
            matched[doc.genre].add(doc.id)
    return {
        g: CorpusSlice(g, frozenset(matched[g]), totals[g]) for g in Genre
    }
