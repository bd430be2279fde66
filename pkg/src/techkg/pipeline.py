"""End-to-end stage orchestration with a persistent per-job journal.

A job is a directory: a journal (job.json), durable review decisions
(reviews.json), and one artifact folder per completed stage. Stages
advance monotonically; artifacts are plain files written atomically
(temp + rename), so a crash mid-stage never corrupts the previous
state and a job resumes from its last completed stage.
"""

import datetime as dt
import json
import logging
import os
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus.documents import (
    CorpusSlice,
    DocumentStore,
    Genre,
    Thesaurus,
    match_thesaurus,
    retrieve_corpus,
)
from .corpus.query import parse_query
from .embeddings import DeterministicProvider, RemoteProvider, embed_document, embed_term
from .extraction import (
    LiveTransport,
    RecordTransport,
    ReplayTransport,
    TripleStatus,
    TypedTriple,
    chunk_text,
    extract_document,
    triples_to_kg,
)
from .keyphrases import GENRE_ORDER, TermScore, score_terms, scores_to_tsv
from .kgio import compare_coverage, export_view_json, parse, serialize
from .ontology import kg_stats, load_profile, profile_from_json
from .reasoning import POLICIES, validate_and_clean
from .relevance import (
    amend_selection,
    score_documents,
    select,
    selection_from_json,
    selection_to_json,
)
from .report import render_report
from .semnet import (
    build_cooccurrence_network,
    build_threshold_network,
    mcl_cluster,
    membership_vector,
    network_stats,
    network_to_graphml,
    network_to_json,
)

log = logging.getLogger(__name__)

STAGES = (
    "ingested",
    "keyphrases_done",
    "network_built",
    "selected",
    "extracted",
    "validated",
    "exported",
)

NETWORK_METHODS = ("threshold", "cooccurrence")
TRANSPORT_MODES = ("live", "record", "replay")


class PipelineError(RuntimeError):
    """A stage failed; the job journal records the cause."""


class StageOrderError(PipelineError):
    """Operation requires a stage that has not completed yet."""


class ReviewConflict(RuntimeError):
    """Re-deciding a triple that already left pending review."""


def _utcnow() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class PipelineConfig:
    """Declarative run parameters, loadable from a flat JSON document.

    Input paths are resolved against the config file's directory at load
    time; output_dir is resolved against the caller's working directory.
    """

    corpus: str
    thesaurus: str
    query: str
    date_start: str
    date_end: str
    embedding: dict = field(default_factory=lambda: {"provider": "deterministic", "dim": 64, "seed": 0})
    network_method: str = "threshold"
    tau: float = 0.5
    sigma: float = 0.5
    mcl_inflation: float = 2.0
    mcl_expansion: int = 2
    selection_k: int = 5
    schema: str = "innovation"
    transport_mode: str = "replay"
    model: str = "demo-llm"
    endpoint: str = ""
    fixtures: str = ""
    auto_accept: bool = False
    quarantine_policy: str = "remove_axiom"
    output_dir: str = "out"

    _FIELDS = (
        "corpus", "thesaurus", "query", "date_start", "date_end", "embedding",
        "network_method", "tau", "sigma", "mcl_inflation", "mcl_expansion",
        "selection_k", "schema", "transport_mode", "model", "endpoint",
        "fixtures", "auto_accept", "quarantine_policy", "output_dir",
    )

    @classmethod
    def from_obj(cls, obj: dict, base_dir=None) -> "PipelineConfig":
        if not isinstance(obj, dict):
            raise ValueError("config must be a JSON object")
        unknown = sorted(set(obj) - set(cls._FIELDS))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        missing = [k for k in ("corpus", "thesaurus", "query", "date_start", "date_end") if k not in obj]
        if missing:
            raise ValueError(f"config missing required keys: {', '.join(missing)}")
        cfg = cls(**obj)
        if base_dir is not None:
            base = Path(base_dir)
            resolved = {}
            for key in ("corpus", "thesaurus", "fixtures"):
                value = getattr(cfg, key)
                if value and not Path(value).is_absolute():
                    resolved[key] = str((base / value).resolve())
            if cfg.schema.endswith(".json") and not Path(cfg.schema).is_absolute():
                resolved["schema"] = str((base / cfg.schema).resolve())
            cfg = replace(cfg, **resolved)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_obj(obj, base_dir=path.parent)

    def validate(self) -> None:
        for key in ("corpus", "thesaurus"):
            path = getattr(self, key)
            if not Path(path).is_file():
                raise ValueError(f"{key} file not found: {path}")
        parse_query(self.query)
        start = dt.date.fromisoformat(self.date_start)
        end = dt.date.fromisoformat(self.date_end)
        if start > end:
            raise ValueError(f"inverted date range: {self.date_start} > {self.date_end}")
        if self.network_method not in NETWORK_METHODS:
            raise ValueError(f"network_method must be one of {NETWORK_METHODS}")
        for name in ("tau", "sigma"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.mcl_inflation <= 1.0:
            raise ValueError("mcl_inflation must exceed 1")
        if self.mcl_expansion < 2:
            raise ValueError("mcl_expansion must be at least 2")
        if self.selection_k < 1:
            raise ValueError("selection_k must be at least 1")
        if self.transport_mode not in TRANSPORT_MODES:
            raise ValueError(f"transport_mode must be one of {TRANSPORT_MODES}")
        if self.transport_mode == "live" and not self.endpoint:
            raise ValueError("live transport requires an endpoint")
        if self.transport_mode in ("record", "replay") and not self.fixtures:
            raise ValueError(f"{self.transport_mode} transport requires a fixtures directory")
        if self.quarantine_policy not in POLICIES:
            raise ValueError(f"quarantine_policy must be one of {POLICIES}")
        provider = self.embedding.get("provider")
        if provider not in ("deterministic", "remote"):
            raise ValueError("embedding.provider must be 'deterministic' or 'remote'")
        if provider == "remote" and not self.embedding.get("endpoint"):
            raise ValueError("remote embedding provider requires embedding.endpoint")
        if self.schema.endswith(".json"):
            if not Path(self.schema).is_file():
                raise ValueError(f"schema profile file not found: {self.schema}")
        else:
            load_profile(self.schema)

    def to_json(self) -> dict:
        return {key: getattr(self, key) for key in self._FIELDS}

    def load_schema(self):
        if self.schema.endswith(".json"):
            obj = json.loads(Path(self.schema).read_text(encoding="utf-8"))
            return profile_from_json(obj)
        return load_profile(self.schema)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class Pipeline:
    """One job: a config snapshot plus its journal and artifacts.

    All mutations (stage runs, review decisions, selection amendments)
    serialize through one lock; reads are plain file loads and may run
    concurrently with anything.
    """

    def __init__(self, job_dir, config: PipelineConfig = None, job_id: str = ""):
        self.dir = Path(job_dir)
        self._lock = threading.RLock()
        self._cache: dict = {}
        journal = self.dir / "job.json"
        if journal.is_file():
            self._job = json.loads(journal.read_text(encoding="utf-8"))
            snapshot = PipelineConfig.from_obj(self._job["config"])
            if config is not None:
                # transport and review automation are runtime knobs, not
                # job identity; everything else is frozen at creation
                runtime = ("transport_mode", "endpoint", "auto_accept")
                ours = {k: v for k, v in config.to_json().items() if k not in runtime}
                theirs = {k: v for k, v in snapshot.to_json().items() if k not in runtime}
                if ours != theirs:
                    raise ValueError(
                        f"job {self._job['job_id']} was created with a different "
                        f"config; start a new job instead of editing this one"
                    )
                if config.to_json() != snapshot.to_json():
                    self._job["config"] = config.to_json()
                    snapshot = config
                    self._save_job()
            self.config = snapshot
        else:
            if config is None:
                raise ValueError(f"no job at {self.dir} and no config given")
            self.config = config
            self.dir.mkdir(parents=True, exist_ok=True)
            self._job = {
                "job_id": job_id or self.dir.name,
                "created": _utcnow(),
                "stage": None,
                "config": config.to_json(),
                "artifacts": {},
                "history": [],
                "error": None,
            }
            self._save_job()

    # -- journal ------------------------------------------------------------

    @property
    def job_id(self) -> str:
        return self._job["job_id"]

    @property
    def stage(self):
        """Name of the last completed stage, or None."""
        return self._job["stage"]

    def record(self) -> dict:
        return json.loads(json.dumps(self._job))

    def _save_job(self):
        self._write_text(self.dir / "job.json", _dump_json(self._job))

    def _stage_index(self) -> int:
        return STAGES.index(self._job["stage"]) if self._job["stage"] else -1

    def _require_stage(self, name: str):
        if self._stage_index() < STAGES.index(name):
            raise StageOrderError(f"stage {name!r} has not completed yet")

    # -- atomic files ---------------------------------------------------------

    @staticmethod
    def _write_text(path: Path, text: str):
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)

    def _artifact_path(self, stage: str, name: str) -> Path:
        return self.dir / "artifacts" / stage / name

    def _put_artifact(self, stage: str, name: str, content: str):
        self._write_text(self._artifact_path(stage, name), content)
        files = self._job["artifacts"].setdefault(stage, [])
        if name not in files:
            files.append(name)

    def load_artifact(self, stage: str, name: str):
        path = self._artifact_path(stage, name)
        if not path.is_file():
            raise StageOrderError(f"artifact {stage}/{name} not available; run the {stage!r} stage")
        text = path.read_text(encoding="utf-8")
        return json.loads(text) if name.endswith(".json") else text

    # -- shared loaders ---------------------------------------------------------

    def _store(self) -> DocumentStore:
        if "store" not in self._cache:
            store = DocumentStore()
            store.ingest_jsonl(self.config.corpus)
            self._cache["store"] = store
        return self._cache["store"]

    def _thesaurus(self) -> Thesaurus:
        if "thesaurus" not in self._cache:
            self._cache["thesaurus"] = Thesaurus.from_tsv(self.config.thesaurus)
        return self._cache["thesaurus"]

    def _slices(self) -> dict:
        obj = self.load_artifact("ingested", "retrieval.json")
        return {
            Genre(g): CorpusSlice(Genre(g), frozenset(s["doc_ids"]), s["total_in_store"])
            for g, s in obj["slices"].items()
        }

    def _retrieved_docs(self) -> list:
        """Matched documents across genres, thesaurus-tagged, sorted by id."""
        if "retrieved" not in self._cache:
            store = self._store()
            thesaurus = self._thesaurus()
            ids = sorted(set().union(*(s.doc_ids for s in self._slices().values())))
            docs = [store.get(i) for i in ids]
            for doc in docs:
                match_thesaurus(doc, thesaurus)
            self._cache["retrieved"] = docs
        return self._cache["retrieved"]

    def _term_score_objs(self) -> list:
        rows = self.load_artifact("keyphrases_done", "scores.json")["scores"]
        return [
            TermScore(
                term_id=r["term_id"],
                npmi_by_genre={Genre(g): v for g, v in r["npmi_by_genre"].items()},
                min_npmi=r["min_npmi"],
                newly_detected=r["newly_detected"],
            )
            for r in rows
        ]

    def _provider(self):
        if "provider" not in self._cache:
            spec = self.config.embedding
            cache_path = self.dir / "cache" / "embeddings.bin"
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            if spec["provider"] == "deterministic":
                provider = DeterministicProvider(
                    dim=spec.get("dim", 64), seed=spec.get("seed", 0), cache_path=cache_path
                )
            else:
                provider = RemoteProvider(
                    endpoint=spec["endpoint"],
                    model=spec.get("model", ""),
                    dim=spec.get("dim", 64),
                    auth_token=spec.get("auth_token", ""),
                    cache_path=cache_path,
                )
            self._cache["provider"] = provider
        return self._cache["provider"]

    def _term_embeddings(self) -> dict:
        thesaurus = self._thesaurus()
        provider = self._provider()
        out = {}
        for score in self._term_score_objs():
            entry = thesaurus.entries[score.term_id]
            out[score.term_id] = embed_term(provider, entry.label, entry.description)
        return out

    def _schema(self):
        if "schema" not in self._cache:
            self._cache["schema"] = self.config.load_schema()
        return self._cache["schema"]

    def _transport(self):
        cfg = self.config
        if cfg.transport_mode == "replay":
            return ReplayTransport(cfg.model, cfg.fixtures)
        live = LiveTransport(cfg.model, cfg.endpoint)
        if cfg.transport_mode == "record":
            return RecordTransport(live, cfg.fixtures)
        return live

    def _reviews(self) -> dict:
        path = self.dir / "reviews.json"
        if not path.is_file():
            return {}
        return json.loads(path.read_text(encoding="utf-8"))

    # -- stage runners -----------------------------------------------------------

    def _run_ingested(self):
        store = self._store()
        query = parse_query(self.config.query)
        slices = retrieve_corpus(
            store, query, (self.config.date_start, self.config.date_end)
        )
        self._put_artifact(
            "ingested",
            "retrieval.json",
            _dump_json(
                {
                    "ingested": len(store),
                    "matched": sum(len(s.doc_ids) for s in slices.values()),
                    "slices": {
                        g.value: {
                            "doc_ids": sorted(s.doc_ids),
                            "total_in_store": s.total_in_store,
                        }
                        for g, s in slices.items()
                    },
                }
            ),
        )

    def _run_keyphrases_done(self):
        thesaurus = self._thesaurus()
        result = score_terms(
            self._slices(), self._store(), thesaurus, parse_query(self.config.query)
        )
        rows = [
            {
                "term_id": t.term_id,
                "label": thesaurus.entries[t.term_id].label,
                "npmi_by_genre": {g.value: v for g, v in t.npmi_by_genre.items()},
                "min_npmi": t.min_npmi,
                "newly_detected": t.newly_detected,
            }
            for t in result.scores
        ]
        self._put_artifact(
            "keyphrases_done",
            "scores.json",
            _dump_json(
                {
                    "partial": result.partial,
                    "covered_genres": [g.value for g in result.covered_genres],
                    "skipped_genres": [g.value for g in result.skipped_genres],
                    "scores": rows,
                }
            ),
        )
        self._put_artifact(
            "keyphrases_done", "scores.tsv", scores_to_tsv(result, thesaurus)
        )

    def _run_network_built(self):
        cfg = self.config
        scores = {t.term_id: t for t in self._term_score_objs()}
        thesaurus = self._thesaurus()
        embeddings = self._term_embeddings()
        if not embeddings:
            raise PipelineError("no terms survived scoring; nothing to map")

        if cfg.network_method == "threshold":
            network = build_threshold_network(embeddings, tau=cfg.tau)
        else:
            provider = self._provider()
            doc_embs = [embed_document(provider, d) for d in self._retrieved_docs()]
            memberships = [
                membership_vector(embeddings[tid], doc_embs, term_id=tid)
                for tid in sorted(embeddings)
            ]
            network = build_cooccurrence_network(memberships, sigma=cfg.sigma)

        clustering = mcl_cluster(
            network, inflation=cfg.mcl_inflation, expansion=cfg.mcl_expansion
        )
        labels = {tid: thesaurus.entries[tid].label for tid in embeddings}
        topicmap = network_to_json(network, clustering, labels)
        for node in topicmap["nodes"]:
            score = scores[node["id"]]
            node["min_npmi"] = score.min_npmi
            node["newly_detected"] = score.newly_detected
        topicmap["stats"] = network_stats(network, clustering)
        topicmap["converged"] = clustering.converged
        topicmap["iterations"] = clustering.iterations
        self._put_artifact("network_built", "topicmap.json", _dump_json(topicmap))
        self._put_artifact(
            "network_built",
            "network.graphml",
            network_to_graphml(network, clustering, labels),
        )

    def _run_selected(self):
        # _retrieved_docs tags matched_terms on the store's documents
        self._retrieved_docs()
        scores = score_documents(
            self._slices(),
            self._term_score_objs(),
            self._term_embeddings(),
            self._provider(),
            self._store(),
        )
        selection = select(scores, self.config.selection_k)
        self._put_artifact(
            "selected",
            "relevance.json",
            _dump_json(
                [
                    {
                        "doc_id": s.doc_id,
                        "score": s.score,
                        "term_mass": s.term_mass,
                        "centroid_sim": s.centroid_sim,
                        "flagged": s.flagged,
                    }
                    for s in scores
                ]
            ),
        )
        self._put_artifact(
            "selected", "selection.json", _dump_json(selection_to_json(selection))
        )

    def _run_extracted(self):
        schema = self._schema()
        transport = self._transport()
        store = self._store()
        selection = selection_from_json(self.load_artifact("selected", "selection.json"))
        triples = []
        for doc_id in selection.doc_ids():
            doc = store.get(doc_id)
            triples.extend(
                extract_document(self._doc_text(doc), schema, transport, doc_id=doc_id)
            )
        self._put_artifact(
            "extracted", "triples.json", _dump_json([t.to_json() for t in triples])
        )

    @staticmethod
    def _doc_text(doc) -> str:
        return f"{doc.title}\n\n{doc.abstract}" if doc.abstract else doc.title

    def _resolved_triples(self) -> list:
        """Extracted triples with review decisions applied.

        Once the validate stage has committed, its snapshot is the
        truth (it reflects any auto-acceptance); before that, durable
        decisions from reviews.json overlay the pending set.
        """
        if self._stage_index() >= STAGES.index("validated"):
            return [
                TypedTriple.from_json(obj)
                for obj in self.load_artifact("validated", "triples_reviewed.json")
            ]
        reviews = self._reviews()
        out = []
        for obj in self.load_artifact("extracted", "triples.json"):
            triple = TypedTriple.from_json(obj)
            decision = reviews.get(triple.triple_id)
            if decision is not None and triple.status == TripleStatus.PENDING_REVIEW:
                if decision["status"] == TripleStatus.ACCEPTED.value:
                    triple = triple.accept()
                else:
                    triple = triple.reject(decision.get("reason", ""))
            out.append(triple)
        return out

    def _run_validated(self):
        triples = self._resolved_triples()
        if self.config.auto_accept:
            triples = [
                t.accept() if t.status == TripleStatus.PENDING_REVIEW else t
                for t in triples
            ]
        pending = sum(1 for t in triples if t.status == TripleStatus.PENDING_REVIEW)
        if pending:
            raise PipelineError(
                f"{pending} triples are awaiting review; decide them "
                f"or set auto_accept"
            )
        accepted = [t for t in triples if t.status == TripleStatus.ACCEPTED]
        schema = self._schema()
        kg = schema.materialize()
        triples_to_kg(accepted, schema, kg)
        cleaned, report, removals = validate_and_clean(
            kg, schema, self.config.quarantine_policy
        )
        self._put_artifact("validated", "kg.ttl", serialize(cleaned))
        self._put_artifact(
            "validated",
            "validation.json",
            _dump_json(
                {
                    **report.to_json(),
                    "policy": self.config.quarantine_policy,
                    "removals": [r.to_json() for r in removals],
                    "triples_accepted": len(accepted),
                    "triples_rejected": sum(
                        1 for t in triples if t.status == TripleStatus.REJECTED
                    ),
                }
            ),
        )
        self._put_artifact(
            "validated",
            "triples_reviewed.json",
            _dump_json([t.to_json() for t in triples]),
        )

    def _run_exported(self):
        kg = parse(self.load_artifact("validated", "kg.ttl"))
        self._put_artifact("exported", "view.json", _dump_json(export_view_json(kg)))
        self._put_artifact("exported", "stats.json", _dump_json(kg_stats(kg)))

    _RUNNERS = {
        "ingested": _run_ingested,
        "keyphrases_done": _run_keyphrases_done,
        "network_built": _run_network_built,
        "selected": _run_selected,
        "extracted": _run_extracted,
        "validated": _run_validated,
        "exported": _run_exported,
    }

    # -- stage driving --------------------------------------------------------

    def run_stage(self, name: str) -> dict:
        """Advance the job by one stage; completed stages are no-ops."""
        if name not in STAGES:
            raise ValueError(f"unknown stage {name!r}; stages are {', '.join(STAGES)}")
        with self._lock:
            target = STAGES.index(name)
            done = self._stage_index()
            if target <= done:
                log.info("job %s: stage %s already complete; no-op", self.job_id, name)
                return self.record()
            if target != done + 1:
                raise StageOrderError(
                    f"stage {name!r} requires {STAGES[target - 1]!r} to complete first"
                )
            try:
                self._RUNNERS[name](self)
            except StageOrderError:
                raise
            except Exception as exc:
                self._job["error"] = {"stage": name, "message": str(exc)}
                self._save_job()
                log.exception("job %s: stage %s failed", self.job_id, name)
                if isinstance(exc, PipelineError):
                    raise
                raise PipelineError(f"stage {name} failed: {exc}") from exc
            self._job["stage"] = name
            self._job["error"] = None
            self._job["history"].append({"stage": name, "completed_at": _utcnow()})
            self._save_job()
            return self.record()

    def run_all(self) -> dict:
        for name in STAGES:
            self.run_stage(name)
        return self.record()

    # -- review ----------------------------------------------------------------

    def review_list(self) -> list:
        self._require_stage("extracted")
        return [t.to_json() for t in self._resolved_triples()]

    def review_queue(self) -> list:
        """Pending triples with the source passage for reviewer context."""
        store = self._store()
        queue = []
        for triple in self._resolved_triples():
            if triple.status != TripleStatus.PENDING_REVIEW:
                continue
            entry = triple.to_json()
            try:
                chunks = chunk_text(self._doc_text(store.get(triple.doc_id)))
                entry["snippet"] = chunks[triple.chunk]
            except (KeyError, IndexError):
                entry["snippet"] = ""
            queue.append(entry)
        return queue

    def review_decide(self, triple_id: str, accept: bool, reason: str = "") -> dict:
        self._require_stage("extracted")
        with self._lock:
            if self._stage_index() >= STAGES.index("validated"):
                raise ReviewConflict("review is closed; the KG is already validated")
            triples = {t.triple_id: t for t in self._resolved_triples()}
            if triple_id not in triples:
                raise KeyError(f"unknown triple id {triple_id!r}")
            current = triples[triple_id]
            status = TripleStatus.ACCEPTED if accept else TripleStatus.REJECTED
            if current.status != TripleStatus.PENDING_REVIEW:
                if current.status == status:
                    return current.to_json()
                raise ReviewConflict(
                    f"triple {triple_id} is already {current.status.value}"
                )
            reviews = self._reviews()
            reviews[triple_id] = {"status": status.value, "reason": reason}
            self._write_text(self.dir / "reviews.json", _dump_json(reviews))
            decided = current.accept() if accept else current.reject(reason)
            return decided.to_json()

    # -- selection amendment ---------------------------------------------------------

    def amend(self, add: str = "", remove: str = "") -> list:
        """Human edit of the selection; frozen once extraction has run."""
        with self._lock:
            self._require_stage("selected")
            if self._stage_index() > STAGES.index("selected"):
                raise StageOrderError("selection is frozen once extraction has run")
            selection = selection_from_json(
                self.load_artifact("selected", "selection.json")
            )
            selection = amend_selection(
                selection, self._store(), add=add, remove=remove, timestamp=_utcnow()
            )
            payload = selection_to_json(selection)
            self._put_artifact("selected", "selection.json", _dump_json(payload))
            self._save_job()
            return payload

    # -- read views --------------------------------------------------------------

    def topicmap(self) -> dict:
        return self.load_artifact("network_built", "topicmap.json")

    def clusters(self) -> list:
        grouped: dict = {}
        for node in self.topicmap()["nodes"]:
            grouped.setdefault(node["cluster"], []).append(
                {"id": node["id"], "label": node["label"]}
            )
        return [
            {"cluster": c, "size": len(members), "members": members}
            for c, members in sorted(
                grouped.items(), key=lambda kv: (-len(kv[1]), kv[0])
            )
        ]

    def scores(self) -> dict:
        return self.load_artifact("keyphrases_done", "scores.json")

    def documents(self, term: str = "", cluster=None) -> list:
        docs = self._retrieved_docs()
        if term:
            docs = [d for d in docs if term in d.matched_terms]
        if cluster is not None:
            members = {
                n["id"] for n in self.topicmap()["nodes"] if n["cluster"] == cluster
            }
            docs = [d for d in docs if d.matched_terms & members]
        relevance = {}
        try:
            relevance = {
                r["doc_id"]: r["score"]
                for r in self.load_artifact("selected", "relevance.json")
            }
        except StageOrderError:
            pass
        out = []
        for doc in docs:
            rec = doc.to_json()
            rec["matched_terms"] = sorted(doc.matched_terms)
            if doc.id in relevance:
                rec["relevance"] = relevance[doc.id]
            out.append(rec)
        out.sort(key=lambda r: (-r.get("relevance", 0.0), r["id"]))
        return out

    def selection(self) -> list:
        return self.load_artifact("selected", "selection.json")

    def kg(self):
        return parse(self.load_artifact("validated", "kg.ttl"))

    def kg_view(self) -> dict:
        return self.load_artifact("exported", "view.json")

    def kg_statistics(self) -> dict:
        self._require_stage("validated")
        return kg_stats(self.kg())

    def kg_turtle(self) -> str:
        return self.load_artifact("validated", "kg.ttl")

    def validation(self) -> dict:
        return self.load_artifact("validated", "validation.json")

    def coverage(self, dump_path) -> dict:
        path = Path(dump_path)
        if not path.is_file():
            raise ValueError(f"dump file not found: {dump_path}")
        try:
            external = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"dump is not valid JSON: {exc}") from exc
        return compare_coverage(self.kg(), external).to_json()

    def report(self) -> dict:
        """Render figures + metrics table under the job directory."""
        artifacts = {}
        for key, stage, name in (
            ("scores", "keyphrases_done", "scores.json"),
            ("topicmap", "network_built", "topicmap.json"),
            ("validation", "validated", "validation.json"),
            ("kg_stats", "exported", "stats.json"),
        ):
            try:
                artifacts[key] = self.load_artifact(stage, name)
            except StageOrderError:
                pass
        if not artifacts:
            raise StageOrderError("no artifacts to report on; run some stages first")
        manifest = render_report(artifacts, self.dir / "report")
        manifest["dir"] = str(self.dir / "report")
        return manifest
