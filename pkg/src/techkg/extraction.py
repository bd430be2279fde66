"""Two-phase schema-constrained triple extraction.

Phase 1 asks the model for {head, relation, tail} triples restricted to
the active schema's relation vocabulary; phase 2 assigns each entity to
one of the schema's classes. Everything runs through a transport with
live, record, and replay modes so pipeline runs are reproducible
offline: replay transports hold no HTTP client at all, and fixtures are
plain files named by a stable request hash.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import requests

from .ontology import KnowledgeGraph, SchemaProfile, iri_for_label, local_name

logger = logging.getLogger(__name__)

CHUNK_CHAR_LIMIT = 1500
PHASE2_BATCH_SIZE = 25


class TransportError(RuntimeError):
    pass


class FixtureMiss(TransportError):
    def __init__(self, request_hash: str):
        super().__init__(f"no recorded fixture for request {request_hash}")
        self.request_hash = request_hash


class ExtractionError(RuntimeError):
    """Raised when a model response yields no parseable JSON array.

    Carries the raw response for diagnosis.
    """

    def __init__(self, message: str, response: str = ""):
        super().__init__(message)
        self.response = response


def request_hash(model: str, prompt: str) -> str:
    h = hashlib.blake2b(digest_size=16)
    h.update(model.encode("utf-8"))
    h.update(b"\x00")
    h.update(prompt.encode("utf-8"))
    return h.hexdigest()


class TripleStatus(str, Enum):
    PENDING_REVIEW = "pending_review"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class RawTriple:
    head: str
    relation: str
    tail: str
    doc_id: str = ""
    chunk: int = 0

    def __post_init__(self):
        for name in ("head", "relation", "tail"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise ValueError(f"triple {name} must be a non-empty string")
            object.__setattr__(self, name, value.strip())


@dataclass(frozen=True)
class TypedTriple:
    head: str
    relation: str
    tail: str
    head_class: str
    tail_class: str
    doc_id: str = ""
    chunk: int = 0
    status: TripleStatus = TripleStatus.PENDING_REVIEW
    reason: str = ""

    @property
    def triple_id(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        for part in (
            self.doc_id,
            str(self.chunk),
            self.head,
            self.relation,
            self.tail,
            self.head_class,
            self.tail_class,
        ):
            h.update(part.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()

    def accept(self) -> "TypedTriple":
        return self._transition(TripleStatus.ACCEPTED, "")

    def reject(self, reason: str = "") -> "TypedTriple":
        return self._transition(TripleStatus.REJECTED, reason)

    def _transition(self, target: TripleStatus, reason: str) -> "TypedTriple":
        if self.status == target:
            return self
        if self.status != TripleStatus.PENDING_REVIEW:
            raise ValueError(
                f"triple {self.triple_id} is {self.status.value}; "
                f"only pending triples may transition"
            )
        return replace(self, status=target, reason=reason)

    def to_json(self) -> dict:
        return {
            "triple_id": self.triple_id,
            "head": self.head,
            "relation": self.relation,
            "tail": self.tail,
            "head_class": self.head_class,
            "tail_class": self.tail_class,
            "doc_id": self.doc_id,
            "chunk": self.chunk,
            "status": self.status.value,
            "reason": self.reason,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TypedTriple":
        return cls(
            head=obj["head"],
            relation=obj["relation"],
            tail=obj["tail"],
            head_class=obj["head_class"],
            tail_class=obj["tail_class"],
            doc_id=obj.get("doc_id", ""),
            chunk=int(obj.get("chunk", 0)),
            status=TripleStatus(obj.get("status", "pending_review")),
            reason=obj.get("reason", ""),
        )


# -- transports ---------------------------------------------------------


class Transport:
    """Base class; subclasses implement _complete(prompt)."""

    mode = "abstract"
    parallelism = 1

    def __init__(self, model: str, temperature: float = 0.0):
        self.model = model
        self.temperature = temperature

    def complete(self, prompt: str) -> str:
        return self._complete(prompt)

    def _complete(self, prompt: str) -> str:
        raise NotImplementedError

    def hash_for(self, prompt: str) -> str:
        return request_hash(self.model, prompt)


class LiveTransport(Transport):
    """Chat-completions style HTTP transport.

    post is injectable for tests; the default uses requests.post.
    """

    mode = "live"
    parallelism = 2

    def __init__(
        self,
        model: str,
        endpoint: str,
        temperature: float = 0.0,
        auth_token: str = "",
        timeout: float = 60.0,
        retries: int = 2,
        post: Optional[Callable] = None,
    ):
        super().__init__(model, temperature)
        self.endpoint = endpoint
        self.auth_token = auth_token
        self.timeout = timeout
        self.retries = retries
        self._post = post if post is not None else requests.post

    def _complete(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        last_error = None
        for _ in range(self.retries + 1):
            try:
                response = self._post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - retry then surface
                last_error = exc
        raise TransportError(
            f"completion request failed after {self.retries + 1} attempts: {last_error}"
        ) from last_error


def _fixture_path(directory: Path, request_hash_: str) -> Path:
    return directory / request_hash_


class RecordTransport(Transport):
    """Wraps a live transport and persists every response by request hash."""

    mode = "record"

    def __init__(self, inner: LiveTransport, fixture_dir):
        # temperature is pinned so recorded fixtures stay stable
        inner.temperature = 0.0
        super().__init__(inner.model, 0.0)
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)
        self.fixture_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _complete(self, prompt: str) -> str:
        response = self.inner.complete(prompt)
        path = _fixture_path(self.fixture_dir, self.hash_for(prompt))
        with self._lock:
            path.write_text(response, encoding="utf-8")
        return response


class ReplayTransport(Transport):
    """Serves responses from the fixture store; holds no HTTP client, so
    no network activity is possible by construction."""

    mode = "replay"
    parallelism = 8

    def __init__(self, model: str, fixture_dir):
        super().__init__(model, 0.0)
        self.fixture_dir = Path(fixture_dir)

    def _complete(self, prompt: str) -> str:
        path = _fixture_path(self.fixture_dir, self.hash_for(prompt))
        if not path.is_file():
            raise FixtureMiss(self.hash_for(prompt))
        return path.read_text(encoding="utf-8")


# -- prompts ------------------------------------------------------------

_PHASE1_HEADER = (
    "As a knowledge graph expert, your task is to extract all possible "
    "meaningful triples from a given sentence following specific schema. "
    "The schema defines triplets in the format "
    "{head : ENTITY 1, relation : RELATIONSHIP, tail : ENTITY 2}. "
    "The RELATIONSHIP signifies the relationship between entities. "
    "Relation should be one of the following.\n\n"
    "Class I -> Relation -> Class II\n"
)

_PHASE1_FOOTER = (
    "\nRespond with a JSON array of objects, each shaped "
    '{"head": ENTITY 1, "relation": RELATIONSHIP, "tail": ENTITY 2}. '
    "Output only the JSON array.\n\nSentence:\n"
)


def render_phase1_prompt(passage: str, schema: SchemaProfile) -> str:
    if not passage.strip():
        raise ValueError("passage must be non-empty")
    if not schema.vocabulary:
        raise ValueError(f"schema {schema.name!r} has no relation vocabulary")
    lines = "\n".join(rel.display for rel in schema.vocabulary)
    return _PHASE1_HEADER + lines + "\n" + _PHASE1_FOOTER + passage.strip() + "\n"


_PHASE2_HEADER = (
    "As a knowledge graph expert, your task is to assign an appropriate "
    "class to each entity in the triples below, following the schema "
    "Class I -> Relation -> Class II. Choose classes only from this "
    "list:\n\n"
)

_PHASE2_FOOTER = (
    "\nRespond with a JSON array of objects, each shaped "
    '{"head": ENTITY 1, "relation": RELATIONSHIP, "tail": ENTITY 2, '
    '"head_class": CLASS, "tail_class": CLASS}. '
    "Output only the JSON array.\n"
)


def render_phase2_prompt(triples, schema: SchemaProfile) -> str:
    if not triples:
        raise ValueError("phase-2 prompt requires at least one triple")
    class_lines = "\n".join(label for _, label in schema.class_defs)
    triple_lines = "\n".join(
        json.dumps(
            {"head": t.head, "relation": t.relation, "tail": t.tail},
            ensure_ascii=False,
        )
        for t in triples
    )
    return (
        _PHASE2_HEADER
        + class_lines
        + "\n\nTriples:\n"
        + triple_lines
        + "\n"
        + _PHASE2_FOOTER
    )


# -- response parsing ----------------------------------------------------

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\n?|```")
_TRAILING_COMMA_RE = re.compile(r",(\s*[\]}])")


def _scan_for_array(text: str):
    decoder = json.JSONDecoder()
    index = text.find("[")
    while index != -1:
        try:
            value, _ = decoder.raw_decode(text, index)
        except json.JSONDecodeError:
            index = text.find("[", index + 1)
            continue
        if isinstance(value, list):
            return value
        index = text.find("[", index + 1)
    return None


def _first_json_array(text: str):
    """First balanced JSON array in text, or None.

    Repairs are attempted in escalating order (none, fence stripping,
    trailing-comma removal) so already-valid arrays are never altered;
    deeper damage is an error, not something to paper over.
    """
    defenced = _FENCE_RE.sub("", text)
    for candidate in (
        text,
        defenced,
        _TRAILING_COMMA_RE.sub(r"\1", defenced),
    ):
        value = _scan_for_array(candidate)
        if value is not None:
            return value
    return None


def parse_triples(response: str) -> list:
    items = _first_json_array(response)
    if items is None:
        raise ExtractionError("no JSON array found in response", response=response)
    triples = []
    for item in items:
        if not isinstance(item, dict):
            logger.warning("skipping non-object triple element: %r", item)
            continue
        try:
            triples.append(
                RawTriple(
                    head=item["head"], relation=item["relation"], tail=item["tail"]
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            logger.warning("skipping malformed triple %r: %s", item, exc)
    return triples


def _parse_assignments(response: str) -> list:
    items = _first_json_array(response)
    if items is None:
        raise ExtractionError(
            "no JSON array found in class-assignment response", response=response
        )
    out = []
    for item in items:
        if not isinstance(item, dict):
            logger.warning("skipping non-object assignment element: %r", item)
            continue
        keys = ("head", "relation", "tail", "head_class", "tail_class")
        if not all(isinstance(item.get(k), str) and item[k].strip() for k in keys):
            logger.warning("skipping malformed assignment %r", item)
            continue
        out.append({k: item[k].strip() for k in keys})
    return out


@dataclass(frozen=True)
class RelationVerdict:
    accepted: bool
    reason: str = ""


def validate_relation(triple: RawTriple, schema: SchemaProfile) -> RelationVerdict:
    if schema.relation_property(triple.relation) is not None:
        return RelationVerdict(accepted=True)
    return RelationVerdict(
        accepted=False,
        reason=f"relation {triple.relation!r} is not in the "
        f"{schema.name} vocabulary",
    )


# -- document extraction -------------------------------------------------


def chunk_text(text: str, limit: int = CHUNK_CHAR_LIMIT) -> list:
    """Blank-line passages merged greedily up to the character limit.

    A single oversized passage stays whole; splitting mid-passage would
    cut sentences the model needs intact.
    """
    passages = [p.strip() for p in re.split(r"\n\s*\n", text) if p.strip()]
    chunks = []
    current = ""
    for passage in passages:
        if not current:
            current = passage
        elif len(current) + 2 + len(passage) <= limit:
            current = current + "\n\n" + passage
        else:
            chunks.append(current)
            current = passage
    if current:
        chunks.append(current)
    return chunks


def extract_document(
    text: str,
    schema: SchemaProfile,
    transport: Transport,
    doc_id: str = "",
) -> list:
    """Run both phases over one document.

    Returns TypedTriples, all pending_review, deduplicated on triple_id.
    Triples with out-of-vocabulary relations, off-schema class
    assignments, or no phase-2 assignment are dropped and logged.
    """
    chunks = chunk_text(text)
    if not chunks:
        return []

    def phase1(indexed):
        index, chunk = indexed
        response = transport.complete(render_phase1_prompt(chunk, schema))
        parsed = parse_triples(response)
        return [replace(t, doc_id=doc_id, chunk=index) for t in parsed]

    workers = max(1, min(transport.parallelism, len(chunks)))
    if workers == 1:
        batches = [phase1(pair) for pair in enumerate(chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(phase1, enumerate(chunks)))

    survivors = []
    for batch in batches:
        for triple in batch:
            verdict = validate_relation(triple, schema)
            if verdict.accepted:
                survivors.append(triple)
            else:
                logger.info("doc %s: %s", doc_id or "<anon>", verdict.reason)
    if not survivors:
        return []

    assignments = {}
    for start in range(0, len(survivors), PHASE2_BATCH_SIZE):
        batch = survivors[start : start + PHASE2_BATCH_SIZE]
        response = transport.complete(render_phase2_prompt(batch, schema))
        for item in _parse_assignments(response):
            key = (item["head"], item["relation"], item["tail"])
            assignments.setdefault(key, (item["head_class"], item["tail_class"]))

    typed = []
    seen = set()
    for triple in survivors:
        key = (triple.head, triple.relation, triple.tail)
        assignment = assignments.get(key)
        if assignment is None:
            logger.info(
                "doc %s: no class assignment returned for %r", doc_id or "<anon>", key
            )
            continue
        head_iri = schema.class_by_name(assignment[0])
        tail_iri = schema.class_by_name(assignment[1])
        if head_iri is None or tail_iri is None:
            bad = assignment[0] if head_iri is None else assignment[1]
            logger.info(
                "doc %s: class %r is not in the %s schema; dropping %r",
                doc_id or "<anon>",
                bad,
                schema.name,
                key,
            )
            continue
        candidate = TypedTriple(
            head=triple.head,
            relation=triple.relation,
            tail=triple.tail,
            head_class=head_iri,
            tail_class=tail_iri,
            doc_id=triple.doc_id,
            chunk=triple.chunk,
        )
        if candidate.triple_id not in seen:
            seen.add(candidate.triple_id)
            typed.append(candidate)
    return typed


# -- KG conversion -------------------------------------------------------


def triples_to_kg(
    triples, schema: SchemaProfile, kg: KnowledgeGraph
) -> KnowledgeGraph:
    """Materialize accepted triples as classes plus existential
    restrictions; label variants that slug to an existing class become
    synonyms. Idempotent for duplicate triples."""
    for triple in triples:
        if triple.status != TripleStatus.ACCEPTED:
            raise ValueError(
                f"triple {triple.triple_id} is {triple.status.value}; "
                f"only accepted triples may enter the graph"
            )
    for triple in triples:
        prop = schema.relation_property(triple.relation)
        if prop is None:
            raise ValueError(
                f"relation {triple.relation!r} has no schema property"
            )
        head_iri = _declare_entity(kg, schema, triple.head, triple.head_class)
        tail_iri = _declare_entity(kg, schema, triple.tail, triple.tail_class)
        kg.add_restriction(head_iri, prop, tail_iri)
    return kg


def _declare_entity(
    kg: KnowledgeGraph, schema: SchemaProfile, label: str, class_iri: str
) -> str:
    iri = iri_for_label(label, kg.namespace)
    if iri in kg.properties:
        raise ValueError(
            f"label {label!r} collides with property {local_name(iri)!r}"
        )
    if iri in kg.classes:
        info = kg.classes[iri]
        if label not in info.labels:
            kg.add_class(iri, synonyms=[label])
    else:
        kg.add_class(iri, labels=[label])
    if iri != class_iri and (iri, class_iri) not in kg.subclass_axioms:
        kg.add_subclass(iri, class_iri)
    return iri
