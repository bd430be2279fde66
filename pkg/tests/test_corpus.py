import datetime as dt

import pytest
from hypothesis import given, settings, strategies as st

from techkg.corpus import (
    And,
    Document,
    DocumentStore,
    Genre,
    Or,
    Phrase,
    Thesaurus,
    match_document,
    match_thesaurus,
    retrieve_corpus,
    stemmed_tokens,
)


def doc(
    doc_id="d1",
    genre="science",
    title="Wiring systems in cars",
    abstract=None,
    date="2020-06-01",
):
    return Document(id=doc_id, genre=genre, title=title, date=date, abstract=abstract)


class TestMatchDocument:
    def test_stemmed_contiguous_phrase(self):
        assert match_document(doc(), Phrase("wiring system"))

    def test_inflection_both_sides(self):
        # "wire systems" stems to the same stream as "Wiring system"
        assert match_document(doc(title="Wired systems"), Phrase("wiring system"))

    def test_contiguity_required(self):
        d = doc(title="Wiring of power systems")
        assert not match_document(d, Phrase("wiring system"))

    def test_no_match_across_field_boundary(self):
        d = doc(title="Automotive wiring", abstract="Systems engineering basics")
        assert not match_document(d, Phrase("wiring system"))
        assert match_document(d, Phrase("wiring"))
        assert match_document(d, Phrase("systems engineering"))

    def test_empty_abstract_nonmatching_title(self):
        assert not match_document(doc(title="Battery packs"), Phrase("wiring"))

    def test_or_with_guaranteed_arm(self):
        d = doc(title="Battery packs")
        assert match_document(d, Or((Phrase("battery"), Phrase("zzzz"))))

    def test_hyphen_and_space_variants_match(self):
        d = doc(title="Drive-by-wire actuation")
        assert match_document(d, Phrase("drive by wire"))

    def test_punctuation_only_phrase_matches_nothing(self):
        assert not match_document(doc(), Phrase("..."))


class TestDocument:
    def test_unknown_json_fields_ignored(self):
        d = Document.from_json(
            {
                "id": "x",
                "genre": "news",
                "title": "t",
                "date": "2021-01-02",
                "source": "somewhere",
                "score": 3,
            }
        )
        assert d.id == "x"
        assert d.genre is Genre.NEWS
        assert d.date == dt.date(2021, 1, 2)

    def test_bad_genre_rejected(self):
        with pytest.raises(ValueError):
            doc(genre="fiction")

    def test_bad_date_rejected(self):
        with pytest.raises(ValueError):
            doc(date="2021-13-40")

    def test_empty_title_rejected(self):
        with pytest.raises(ValueError):
            doc(title="")


class TestStore:
    def test_duplicate_id_rejected(self):
        store = DocumentStore()
        store.add(doc("a"))
        with pytest.raises(ValueError):
            store.add(doc("a", title="other"))

    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        store = DocumentStore(path)
        store.add(doc("a", abstract="Some text."))
        store.add(doc("b", genre="news", title="Battery news", date="2021-02-03"))
        reloaded = DocumentStore(path)
        assert len(reloaded) == 2
        b = reloaded.get("b")
        assert b.genre is Genre.NEWS
        assert b.date == dt.date(2021, 2, 3)
        assert reloaded.get("a").abstract == "Some text."

    def test_ingest_jsonl_ignores_unknown_fields(self, tmp_path):
        src = tmp_path / "in.jsonl"
        src.write_text(
            '{"id": "a", "genre": "patents", "title": "Connector", '
            '"date": "2020-01-01", "assignee": "ACME"}\n',
            encoding="utf-8",
        )
        store = DocumentStore()
        assert store.ingest_jsonl(src) == 1
        assert store.get("a").genre is Genre.PATENTS


class TestRetrieve:
    def _store(self):
        store = DocumentStore()
        store.add(doc("n1", "news", "Car wiring recall", date="2020-01-05"))
        store.add(doc("n2", "news", "Sports results", date="2020-02-01"))
        store.add(doc("s1", "science", "Wiring systems in cars", date="2020-03-01"))
        store.add(doc("s2", "science", "Protein folding", date="2019-01-01"))
        store.add(doc("p1", "patents", "Car wiring harness", date="2021-06-30"))
        return store

    def test_slices_partition_matches_by_genre(self):
        out = retrieve_corpus(
            self._store(), Phrase("wiring"), ("2020-01-01", "2021-12-31")
        )
        assert out[Genre.NEWS].doc_ids == {"n1"}
        assert out[Genre.SCIENCE].doc_ids == {"s1"}
        assert out[Genre.PATENTS].doc_ids == {"p1"}
        assert out[Genre.NEWS].total_in_store == 2
        assert out[Genre.SCIENCE].total_in_store == 2
        assert out[Genre.PATENTS].total_in_store == 1

    def test_empty_result_keeps_totals(self):
        out = retrieve_corpus(
            self._store(), Phrase("zzzz"), ("2020-01-01", "2021-12-31")
        )
        assert all(not s.doc_ids for s in out.values())
        assert out[Genre.SCIENCE].total_in_store == 2

    def test_degenerate_range(self):
        out = retrieve_corpus(
            self._store(), Phrase("wiring"), ("2020-01-05", "2020-01-05")
        )
        assert out[Genre.NEWS].doc_ids == {"n1"}
        assert not out[Genre.SCIENCE].doc_ids

    def test_inverted_range_rejected(self):
        with pytest.raises(ValueError):
            retrieve_corpus(
                self._store(), Phrase("wiring"), ("2021-01-01", "2020-01-01")
            )


class TestThesaurus:
    def test_tsv_parsing(self, tmp_path):
        path = tmp_path / "thesaurus.tsv"
        path.write_text(
            "T1\tController Area Network\tVehicle bus standard\tCAN|CAN bus\n"
            "T2\tBattery\t\t\n"
            "# comment\n"
            "T3\tWiring harness\tCable assembly\n",
            encoding="utf-8",
        )
        th = Thesaurus.from_tsv(path)
        assert len(th) == 3
        assert th.entries["T1"].aliases == ("CAN", "CAN bus")
        assert th.entries["T2"].description == ""
        assert th.entries["T3"].aliases == ()

    def test_duplicate_term_id_rejected(self, tmp_path):
        path = tmp_path / "thesaurus.tsv"
        path.write_text("T1\tA\n T1\tB\n".replace(" ", ""), encoding="utf-8")
        with pytest.raises(ValueError):
            Thesaurus.from_tsv(path)

    def test_label_match_stemmed(self, tmp_path):
        path = tmp_path / "thesaurus.tsv"
        path.write_text(
            "T1\tController Area Network\t\tCAN bus\n"
            "T2\tGearbox\t\t\n",
            encoding="utf-8",
        )
        th = Thesaurus.from_tsv(path)
        d = doc(title="Attacks on the controller area networks of cars")
        assert match_thesaurus(d, th) == {"T1"}
        assert d.matched_terms == {"T1"}

    def test_alias_match(self, tmp_path):
        path = tmp_path / "thesaurus.tsv"
        path.write_text("T1\tController Area Network\t\tCAN bus\n", encoding="utf-8")
        th = Thesaurus.from_tsv(path)
        assert match_thesaurus(doc(title="CAN bus fuzzing"), th) == {"T1"}

    def test_empty_thesaurus(self):
        assert match_thesaurus(doc(), Thesaurus({})) == set()

    def test_split_across_boundary_absent(self, tmp_path):
        path = tmp_path / "thesaurus.tsv"
        path.write_text("T1\tbattery charger\t\t\n", encoding="utf-8")
        th = Thesaurus.from_tsv(path)
        d = doc(title="An improved battery", abstract="Charger design notes")
        assert match_thesaurus(d, th) == set()


# Independent evaluator for the property tests below: joins stemmed
# tokens with a sentinel and uses substring search instead of windowed
# tuple comparison.
def _oracle_match(d, query):
    if isinstance(query, Phrase):
        needle = stemmed_tokens(query.text)
        if not needle:
            return False
        packed = "\x1f" + "\x1f".join(needle) + "\x1f"
        for field_text in filter(None, (d.title, d.abstract)):
            hay = "\x1f" + "\x1f".join(stemmed_tokens(field_text)) + "\x1f"
            if packed in hay:
                return True
        return False
    if isinstance(query, And):
        return all(_oracle_match(d, c) for c in query.children)
    return any(_oracle_match(d, c) for c in query.children)


_WORDS = "wiring system car battery bus sensor brake control data harness".split()

_doc_strategy = st.builds(
    doc,
    doc_id=st.uuids().map(str),
    genre=st.sampled_from(["news", "science", "patents"]),
    title=st.lists(st.sampled_from(_WORDS), min_size=1, max_size=6).map(" ".join),
    abstract=st.one_of(
        st.none(),
        st.lists(st.sampled_from(_WORDS), min_size=1, max_size=10).map(" ".join),
    ),
    date=st.dates(dt.date(2018, 1, 1), dt.date(2023, 12, 31)).map(str),
)

_phrase_strategy = st.lists(st.sampled_from(_WORDS), min_size=1, max_size=2).map(
    lambda ws: Phrase(" ".join(ws))
)
_query_strategy = st.recursive(
    _phrase_strategy,
    lambda inner: st.one_of(
        st.lists(inner, min_size=2, max_size=3).map(lambda c: And(tuple(c))),
        st.lists(inner, min_size=2, max_size=3).map(lambda c: Or(tuple(c))),
    ),
    max_leaves=8,
)


@given(_doc_strategy, _query_strategy, _query_strategy)
def test_boolean_algebra_laws(d, a, b):
    assert match_document(d, And((a, b))) == (
        match_document(d, a) and match_document(d, b)
    )
    assert match_document(d, Or((a, b))) == (
        match_document(d, a) or match_document(d, b)
    )


@given(_doc_strategy, _query_strategy)
def test_match_agrees_with_independent_evaluator(d, q):
    assert match_document(d, q) == _oracle_match(d, q)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(_doc_strategy, min_size=0, max_size=40, unique_by=lambda d: d.id),
    _query_strategy,
    st.dates(dt.date(2018, 1, 1), dt.date(2023, 12, 31)),
    st.dates(dt.date(2018, 1, 1), dt.date(2023, 12, 31)),
)
def test_retrieve_equals_brute_force(docs, q, d1, d2):
    start, end = min(d1, d2), max(d1, d2)
    store = DocumentStore()
    store.add_many(docs)
    out = retrieve_corpus(store, q, (start, end))
    for genre in Genre:
        expected = {
            d.id
            for d in docs
            if d.genre is genre and start <= d.date <= end and _oracle_match(d, q)
        }
        assert out[genre].doc_ids == expected
        assert out[genre].total_in_store == sum(
            1 for d in docs if d.genre is genre
        )
