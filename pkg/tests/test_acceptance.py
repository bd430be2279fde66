"""Release gates.

One test per shipped guarantee, each tagged with a criterion marker so
the run ends with a single PASS/FAIL line per gate (see conftest).
Numeric gates check against arithmetic that is recomputed here from
first principles, not against values the implementation produced.
"""

import logging
import math
import random
import socket
import time
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings

from techkg import data
from techkg.corpus import (
    CorpusSlice,
    Document,
    DocumentStore,
    Genre,
    Thesaurus,
    ThesaurusEntry,
    parse_query,
)
from techkg.embeddings import Embedding
from techkg.extraction import ReplayTransport, extract_document
from techkg.keyphrases import GenreCounts, npmi, score_terms
from techkg.kgio import parse, serialize
from techkg.ontology import (
    DEFAULT_NAMESPACE,
    KnowledgeGraph,
    ObjectProperty,
    gbo_lite,
    innovation_schema,
)
from techkg.pipeline import Pipeline
from techkg.reasoning import (
    POLICIES,
    RuleId,
    check,
    entailed_property,
    validate_and_clean,
)
from techkg.semnet import (
    MembershipVector,
    SemanticNetwork,
    build_threshold_network,
    mcl_cluster,
    tanimoto,
)

from test_kgio import GOLDEN, can_bus_kg, random_serializable_kgs
from test_pipeline import SAMPLE_TRIPLES, demo_config
from test_reasoning import charging_system_kg, n, part_chain_kg

NS = DEFAULT_NAMESPACE


# -- term scoring -------------------------------------------------------------


def brute_npmi(n_total: int, n_term: int, n_corpus: int, n_joint: int) -> float:
    """Textbook arithmetic, written independently of the library path."""
    if n_joint == 0:
        return -1.0
    if n_joint == n_term == n_corpus:
        return 1.0
    numerator = math.log(n_joint * n_total) - math.log(n_term * n_corpus)
    denominator = math.log(n_total) - math.log(n_joint)
    return numerator / denominator


@pytest.mark.criterion("nPMI equals brute-force arithmetic on 1000 random tables")
def test_npmi_matches_brute_force():
    rng = random.Random(20260815)
    start = time.perf_counter()
    for _ in range(1000):
        n_total = rng.randint(1, 10_000)
        n_term = rng.randint(1, n_total)
        n_corpus = rng.randint(1, n_total)
        lo = max(0, n_term + n_corpus - n_total)
        n_joint = rng.randint(lo, min(n_term, n_corpus))
        got = npmi(GenreCounts(Genre.NEWS, n_total, n_term, n_corpus, n_joint))
        assert abs(got - brute_npmi(n_total, n_term, n_corpus, n_joint)) <= 1e-12

    # boundary identities hold exactly, not merely within tolerance
    assert npmi(GenreCounts(Genre.NEWS, 100, 10, 20, 2)) == 0.0  # independent
    assert npmi(GenreCounts(Genre.NEWS, 100, 10, 20, 0)) == -1.0  # never joint
    assert npmi(GenreCounts(Genre.NEWS, 100, 30, 30, 30)) == 1.0  # always joint
    assert npmi(GenreCounts(Genre.NEWS, 7, 7, 7, 7)) == 1.0
    assert time.perf_counter() - start < 5.0


def _tri_genre_corpus():
    """300 docs, 100 per genre, slice = the first 60 of each.

    Five keeper terms occur only inside the slices; five designed
    failures each break positivity in exactly one genre, one failure
    mode apiece: absent genre, slice-disjoint, exactly independent,
    and two flavors of negative association.
    """
    keep_counts = {
        "k1": (40, 30, 20),
        "k2": (16, 16, 16),
        "k3": (12, 12, 12),
        "k4": (8, 8, 8),
        "k5": (4, 4, 4),
    }
    fail_docs = {
        "f1": {Genre.NEWS: range(10), Genre.SCIENCE: range(10), Genre.PATENTS: ()},
        "f2": {Genre.NEWS: range(10), Genre.SCIENCE: range(60, 70), Genre.PATENTS: range(10)},
        "f3": {Genre.NEWS: (0, 1, 2, 97, 98), Genre.SCIENCE: range(10), Genre.PATENTS: range(10)},
        "f4": {Genre.NEWS: range(10), Genre.SCIENCE: range(10), Genre.PATENTS: (0, 1, 2, 3, 4, 90, 91, 92, 93, 94)},
        "f5": {Genre.NEWS: (0, 80, 81, 82, 83, 84, 85, 86, 87, 88), Genre.SCIENCE: range(8), Genre.PATENTS: range(8)},
    }
    labels = {
        "k1": "alphatron", "k2": "betatron", "k3": "gammatron",
        "k4": "deltatron", "k5": "epsilontron",
        "f1": "zetatron", "f2": "etatron", "f3": "thetatron",
        "f4": "iotatron", "f5": "kappatron",
    }
    genres = (Genre.NEWS, Genre.SCIENCE, Genre.PATENTS)

    terms_at: dict = {}
    for tid, counts in keep_counts.items():
        for genre, count in zip(genres, counts):
            for i in range(count):
                terms_at.setdefault((genre, i), []).append(tid)
    for tid, spec_docs in fail_docs.items():
        for genre, indexes in spec_docs.items():
            for i in indexes:
                terms_at.setdefault((genre, i), []).append(tid)

    store = DocumentStore()
    slices = {}
    for genre in genres:
        ids = []
        for i in range(100):
            doc_id = f"{genre.value[0]}{i:03d}"
            words = " ".join(labels[t] for t in terms_at.get((genre, i), []))
            store.add(
                Document(
                    id=doc_id,
                    genre=genre,
                    title=f"report {i}",
                    date="2024-01-01",
                    abstract=f"routine bench study {words}".strip(),
                )
            )
            if i < 60:
                ids.append(doc_id)
        slices[genre] = CorpusSlice(genre, frozenset(ids), 100)

    thesaurus = Thesaurus({t: ThesaurusEntry(labels[t]) for t in sorted(labels)})
    return store, slices, thesaurus, keep_counts, fail_docs


@pytest.mark.criterion("cross-genre filter keeps exactly the all-positive terms, ranked")
def test_cross_genre_filter_on_engineered_corpus():
    start = time.perf_counter()
    store, slices, thesaurus, keep_counts, fail_docs = _tri_genre_corpus()
    result = score_terms(slices, store, thesaurus, parse_query('"bench"'))

    expected_min = {
        tid: min(brute_npmi(100, k, 60, k) for k in counts)
        for tid, counts in keep_counts.items()
    }
    ranked = sorted(expected_min, key=lambda t: -expected_min[t])
    assert [t.term_id for t in result] == ranked == ["k1", "k2", "k3", "k4", "k5"]
    for score in result:
        assert abs(score.min_npmi - expected_min[score.term_id]) <= 1e-12
        assert len(score.npmi_by_genre) == 3
        assert min(score.npmi_by_genre.values()) > 0.0

    # every engineered failure is rejected despite two healthy genres
    assert not {t.term_id for t in result} & set(fail_docs)
    assert result.partial is False
    assert time.perf_counter() - start < 10.0


# -- semantic network -----------------------------------------------------------


@pytest.mark.criterion("threshold network matches precomputed cutoff, scale-invariant")
def test_threshold_network_against_precomputed_distances():
    rng = np.random.default_rng(42)
    centers = rng.normal(size=(3, 6))
    raw = {
        f"v{i:02d}": centers[i % 3] + rng.normal(scale=0.08, size=6)
        for i in range(12)
    }
    embeddings = {k: Embedding(v, "fixture") for k, v in raw.items()}

    def unit(vec):
        arr = np.asarray(vec, dtype=float)
        return arr / math.sqrt(float(np.dot(arr, arr)))

    expected = {
        tuple(sorted((a, b)))
        for a, b in combinations(sorted(raw), 2)
        if 1.0 - float(np.dot(unit(raw[a]), unit(raw[b]))) <= 0.5
    }
    network = build_threshold_network(embeddings, tau=0.5)
    assert set(network.edges) == expected
    assert 0 < len(expected) < len(raw) * (len(raw) - 1) // 2  # both sides hit

    for _ in range(200):
        scales = rng.uniform(0.05, 20.0, size=12)
        rescaled = {
            key: Embedding(raw[key] * scales[i], "fixture")
            for i, key in enumerate(sorted(raw))
        }
        assert set(build_threshold_network(rescaled, tau=0.5).edges) == expected


@pytest.mark.criterion("Tanimoto: symmetry, identity, range, halved-overlap case")
def test_tanimoto_properties():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        a = rng.random(8)
        b = rng.random(8)
        a[0] = max(a[0], 1e-6)
        b[0] = max(b[0], 1e-6)
        va = MembershipVector("a", a)
        vb = MembershipVector("b", b)
        value = tanimoto(va, vb)
        assert value == tanimoto(vb, va)
        assert 0.0 <= value <= 1.0
        assert tanimoto(va, va) == 1.0
    hand_a = MembershipVector("x", [1.0, 0.0])
    hand_b = MembershipVector("y", [1.0, 1.0])
    assert tanimoto(hand_a, hand_b) == 0.5


def _clique_edges(nodes):
    return {tuple(sorted(pair)): 1.0 for pair in combinations(nodes, 2)}


@pytest.mark.criterion("MCL: splits bridged cliques, singletons when edgeless, fast")
def test_mcl_reference_partitions_and_speed():
    left = [f"a{i}" for i in range(5)]
    right = [f"b{i}" for i in range(5)]
    edges = {**_clique_edges(left), **_clique_edges(right)}
    edges[("a0", "b0")] = 1.0
    network = SemanticNetwork(frozenset(left + right), edges)

    start = time.perf_counter()
    clustering = mcl_cluster(network, inflation=2.0)
    # partition fixed ahead of the build by an independent MCL run
    assert set(clustering.clusters) == {frozenset(left), frozenset(right)}
    assert clustering.converged and clustering.iterations < 100

    lonely = SemanticNetwork(frozenset(f"s{i}" for i in range(30)), {})
    isolated = mcl_cluster(lonely, inflation=2.0)
    assert len(isolated) == 30
    assert all(len(c) == 1 for c in isolated.clusters)

    rng = random.Random(7)
    big_nodes = [f"n{i:03d}" for i in range(100)]
    big_edges = {
        tuple(sorted(pair)): rng.uniform(0.3, 1.0)
        for pair in combinations(big_nodes, 2)
        if rng.random() < 0.06
    }
    big = mcl_cluster(SemanticNetwork(frozenset(big_nodes), big_edges), inflation=2.0)
    assert big.converged and big.iterations < 100
    assert big.covers() == frozenset(big_nodes)
    assert time.perf_counter() - start < 1.0


# -- extraction -------------------------------------------------------------


@pytest.mark.criterion("replay extraction: reference triples offline, junk rejected")
def test_replay_extraction_is_offline_and_faithful(monkeypatch, caplog):
    def refuse(*args, **kwargs):
        raise AssertionError("network touched during replay")

    monkeypatch.setattr(socket, "socket", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)
    caplog.set_level(logging.INFO, logger="techkg.extraction")

    store = DocumentStore(data.corpus_path())
    schema = innovation_schema()
    transport = ReplayTransport("demo-llm", data.fixtures_dir())
    triples = []
    for doc_id in ("s02", "s04", "p01", "n01", "p02"):
        doc = store.get(doc_id)
        triples.extend(
            extract_document(
                f"{doc.title}\n\n{doc.abstract}", schema, transport, doc_id=doc_id
            )
        )

    found = {(t.head, t.relation, t.tail) for t in triples}
    assert SAMPLE_TRIPLES <= found
    # the canned response for n01 offers a relation outside the schema
    assert ("zonal ECU architecture", "connected to", "central gateway") not in found
    dropped = [r.getMessage() for r in caplog.records if "connected to" in r.getMessage()]
    assert dropped, "rejection of the off-vocabulary relation was not logged"


# -- validation ----------------------------------------------------------------


def oracle_reachable(kg: KnowledgeGraph, prop: str) -> set:
    """All (a, b) derivable for prop, by set-based Warshall closure."""

    def lifts(q):
        seen = set()
        while q is not None and q not in seen:
            if q == prop:
                return True
            seen.add(q)
            parent = kg.properties.get(q)
            q = parent.sub_property_of if parent else None
        return False

    edges = {(c, f) for (c, q, f) in kg.restrictions if lifts(q)}
    if not kg.properties[prop].transitive:
        return edges
    reach = {a: set() for a in kg.classes}
    for a, b in edges:
        reach[a].add(b)
    for mid in kg.classes:
        for src in kg.classes:
            if mid in reach[src]:
                reach[src] |= reach[mid]
    return {(a, b) for a in reach for b in reach[a]}


def random_restriction_graph(rng: random.Random):
    ns = "http://example.org/ent#"
    kg = KnowledgeGraph(ns)
    kg.add_property(
        ObjectProperty(ns + "p_base", transitive=bool(rng.getrandbits(1)))
    )
    kg.add_property(ObjectProperty(ns + "p_sub", sub_property_of=ns + "p_base"))
    kg.add_property(
        ObjectProperty(ns + "p_solo", transitive=bool(rng.getrandbits(1)))
    )
    props = [ns + "p_base", ns + "p_sub", ns + "p_solo"]
    classes = [ns + f"c{i}" for i in range(rng.randint(2, 12))]
    for iri in classes:
        kg.add_class(iri)
    for _ in range(rng.randint(0, 20)):
        kg.add_restriction(rng.choice(classes), rng.choice(props), rng.choice(classes))
    return kg, classes, props


def random_categorized_graph(rng: random.Random):
    schema = gbo_lite()
    kg = schema.materialize()
    tops = ("system", "component", "function", "technology", "method")
    relations = ("has_part", "has_part_directly", "part_of", "part_of_directly", "implements")
    classes = [n(f"e{i}") for i in range(rng.randint(2, 8))]
    for iri in classes:
        kg.add_class(iri)
        if rng.random() < 0.85:
            kg.add_subclass(iri, n(rng.choice(tops)))
        if rng.random() < 0.2:
            kg.add_subclass(iri, n(rng.choice(tops)))
    for _ in range(rng.randint(0, 12)):
        kg.add_restriction(rng.choice(classes), n(rng.choice(relations)), rng.choice(classes))
    return schema, kg


@pytest.mark.criterion("reasoner: clean scenario, 1 violation per mutation, oracle parity")
def test_reasoner_scenarios_and_oracle_parity():
    schema, kg = charging_system_kg()
    assert check(kg, schema).violations == ()

    schema, kg = charging_system_kg()
    kg.add_restriction(n("charging_system"), n("implements"), n("battery"))
    report = check(kg, schema)
    assert len(report.violations) == 1
    assert report.violations[0].rule_id is RuleId.RANGE_VIOLATION

    schema, kg = charging_system_kg()
    kg.add_class(n("mystery_box"))
    report = check(kg, schema)
    assert len(report.violations) == 1
    assert report.violations[0].rule_id is RuleId.UNCATEGORIZED_CLASS

    schema, kg = part_chain_kg()
    kg.add_restriction(n("a"), n("has_part_directly"), n("c"))
    report = check(kg, schema)
    assert len(report.violations) == 1
    assert report.violations[0].rule_id is RuleId.PART_SHORTCUT

    rng = random.Random(99)
    for _ in range(500):
        kg, classes, props = random_restriction_graph(rng)
        for prop in props:
            expected = oracle_reachable(kg, prop)
            for a in classes:
                for b in classes:
                    assert entailed_property(kg, a, prop, b) == ((a, b) in expected)

    rng = random.Random(123)
    for _ in range(500):
        schema, kg = random_categorized_graph(rng)
        policy = rng.choice(POLICIES)
        cleaned, _, removals = validate_and_clean(kg, schema, policy)
        _, second_report, second_removals = validate_and_clean(cleaned, schema, policy)
        assert second_removals == []
        assert second_report.removed_axiom_count == 0


# -- serialization ----------------------------------------------------------


@pytest.mark.criterion("turtle round-trip over 500 random graphs, golden bytes stable")
@settings(max_examples=500, deadline=None)
@given(random_serializable_kgs())
def test_serialization_round_trip_and_golden(kg):
    assert parse(serialize(kg)) == kg
    assert serialize(gbo_lite().materialize()) == GOLDEN.read_text(encoding="utf-8")
    assert parse(serialize(can_bus_kg())) == can_bus_kg()


# -- end to end -----------------------------------------------------------------


@pytest.mark.criterion("bundled corpus end-to-end: clean KG, byte-identical reruns")
def test_end_to_end_replay_run(tmp_path):
    trees = []
    for name in ("first", "second"):
        pipe = Pipeline(tmp_path / name, config=demo_config())
        start = time.perf_counter()
        pipe.run_all()
        assert time.perf_counter() - start < 60.0
        assert pipe.stage == "exported"
        assert pipe.kg_statistics()["class_count"] >= 10
        assert pipe.validation()["summary"]["violation_count"] == 0
        root = tmp_path / name / "artifacts"
        trees.append(
            {
                str(p.relative_to(root)): p.read_bytes()
                for p in sorted(root.rglob("*"))
                if p.is_file()
            }
        )
    assert trees[0] == trees[1]
