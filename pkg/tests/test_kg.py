import json

import pytest
from hypothesis import given, strategies as st

from kgchat.kg import (
    DanglingReferenceError,
    Entity,
    Graph,
    GraphError,
    ParseError,
    RangeKindError,
    StaticResolver,
    Triple,
    UnknownIdError,
)

from conftest import DATA_DIR


def learned(dom, prop, ran, user="alice", tense="present"):
    return Triple(dom, prop, ran, tense=tense, source=f"learned:{user}")


class TestLoading:
    def test_fixture_pack_loads(self, graph):
        assert "alquist" in graph.entities
        assert "likes_music" in graph.properties
        assert any(t.property_id == "named_after" for t in graph.iter_triples())

    def test_parse_error_carries_file_and_line(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        (data / "entities.jsonl").write_text(
            '{"id": "a", "name": "A"}\n{"id": "b"\n', encoding="utf-8")
        with pytest.raises(ParseError) as err:
            Graph.load(data)
        assert err.value.line_no == 2
        assert "entities.jsonl" in err.value.path

    def test_semantic_error_carries_line(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        (data / "entities.jsonl").write_text(
            json.dumps({"id": "a", "name": "A", "gender": "spherical"}) + "\n",
            encoding="utf-8")
        with pytest.raises(ParseError) as err:
            Graph.load(data)
        assert err.value.line_no == 1

    def test_dangling_reference_rejected(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        (data / "entities.jsonl").write_text(
            json.dumps({"id": "a", "name": "A"}) + "\n", encoding="utf-8")
        (data / "properties.jsonl").write_text(
            json.dumps({"id": "p", "range": "string"}) + "\n", encoding="utf-8")
        (data / "triples.jsonl").write_text(
            json.dumps({"dom": "ghost", "prop": "p", "ran": "x"}) + "\n",
            encoding="utf-8")
        with pytest.raises(DanglingReferenceError) as err:
            Graph.load(data)
        assert "ghost" in err.value.missing_ids

    def test_range_kind_enforced_on_load(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        (data / "entities.jsonl").write_text(
            json.dumps({"id": "a", "name": "A"}) + "\n", encoding="utf-8")
        (data / "properties.jsonl").write_text(
            json.dumps({"id": "p", "range": "integer"}) + "\n", encoding="utf-8")
        (data / "triples.jsonl").write_text(
            json.dumps({"dom": "a", "prop": "p", "ran": "three"}) + "\n",
            encoding="utf-8")
        with pytest.raises(RangeKindError):
            Graph.load(data)

    def test_entity_invariants(self):
        with pytest.raises(ValueError):
            Entity(id="x", canonical_name="X", popularity=0.5)
        with pytest.raises(ValueError):
            Entity(id="x", canonical_name="")


class TestResolveName:
    def test_exact_canonical_match(self, graph):
        (top, *_rest) = graph.resolve_name("matrix")
        assert (top.entity_id, top.score, top.source) == ("the_matrix_film", 1.0, "private")

    def test_alias_match_scores_lower(self, graph):
        top = graph.resolve_name("the matrix")[0]
        assert (top.entity_id, top.score) == ("the_matrix_film", 0.9)

    def test_fuzzy_token_overlap(self, graph):
        # one of two tokens matches "Tom Hanks"
        hits = {c.entity_id: c.score for c in graph.resolve_name("tom")}
        assert hits.get("tom_hanks") == 0.5

    def test_below_floor_dropped(self, graph):
        assert graph.resolve_name("completely unrelated phrase here") == []

    def test_general_resolver_appended(self, tmp_path):
        graph = Graph.load(DATA_DIR, store_dir=tmp_path,
                           general_resolver=StaticResolver({"zanzibar": "ext:zanzibar"}))
        hits = graph.resolve_name("zanzibar")
        assert [(c.entity_id, c.source) for c in hits] == [("ext:zanzibar", "general")]

    def test_empty_surface_rejected(self, graph):
        with pytest.raises(ValueError):
            graph.resolve_name("")


class TestQueries:
    def test_query_builtin(self, graph):
        values = [t.range_value for t in graph.query("alquist", "favorite_movie")]
        assert values == ["the_matrix_film"]

    def test_query_unknown_ids_raise(self, graph):
        with pytest.raises(UnknownIdError):
            graph.query("nobody", "likes")
        with pytest.raises(UnknownIdError):
            graph.query("alquist", "no_such_property")

    def test_unknown_value_is_empty_not_error(self, graph):
        assert graph.query("jara_cimrman", "born_in") == []

    def test_learned_facts_are_user_scoped(self, graph):
        alice = graph.user_entity_id("alice")
        graph.user_entity_id("bob")
        graph.assert_fact(learned(alice, "sibling_count", 3, user="alice"))
        assert [t.range_value for t in graph.query(alice, "sibling_count", user_id="alice")] == [3]
        assert graph.query(alice, "sibling_count", user_id="bob") == []
        assert graph.query(alice, "sibling_count") == []


class TestCheckAndAssert:
    def test_check_confirmed(self, graph):
        assert graph.check_fact("alfred_nobel", "born_in", "sweden").status == "confirmed"

    def test_check_contradicted_reports_actual(self, graph):
        result = graph.check_fact("alfred_nobel", "born_in", "france")
        assert result.status == "contradicted"
        assert result.actual == "sweden"

    def test_check_unknown(self, graph):
        assert graph.check_fact("jara_cimrman", "born_in", "france").status == "unknown"

    def test_non_functional_mismatch_is_unknown(self, graph):
        # likes is multi-valued: an unseen value is not a contradiction
        assert graph.check_fact("alquist", "likes", "alfred_nobel").status == "unknown"

    def test_assert_requires_learned_source(self, graph):
        with pytest.raises(GraphError):
            graph.assert_fact(Triple("alquist", "likes", "tom_hanks", source="builtin"))

    def test_assert_and_supersede(self, graph):
        alice = graph.user_entity_id("alice")
        assert graph.assert_fact(learned(alice, "sibling_count", 3)).status == "stored_new"
        outcome = graph.assert_fact(learned(alice, "sibling_count", 2))
        assert outcome.status == "superseded"
        assert outcome.old.range_value == 3
        assert [t.range_value for t in graph.query(alice, "sibling_count", user_id="alice")] == [2]

    def test_reasserting_same_value_is_not_supersession(self, graph):
        alice = graph.user_entity_id("alice")
        graph.assert_fact(learned(alice, "sibling_count", 3))
        assert graph.assert_fact(learned(alice, "sibling_count", 3)).status == "stored_new"

    def test_non_functional_accumulates(self, graph):
        alice = graph.user_entity_id("alice")
        graph.assert_fact(learned(alice, "likes_music", "funk"))
        assert graph.assert_fact(learned(alice, "likes_music", "jazz")).status == "stored_new"
        values = {t.range_value for t in graph.query(alice, "likes_music", user_id="alice")}
        assert values == {"funk", "jazz"}

    def test_assert_range_kind_checked(self, graph):
        alice = graph.user_entity_id("alice")
        with pytest.raises(RangeKindError):
            graph.assert_fact(learned(alice, "sibling_count", "three"))


class TestPersistence:
    def test_journal_round_trip(self, tmp_path):
        graph = Graph.load(DATA_DIR, store_dir=tmp_path)
        alice = graph.user_entity_id("alice")
        graph.assert_fact(learned(alice, "sibling_count", 3))
        graph.assert_fact(learned(alice, "likes_music", "funk"))
        graph.persist("alice")

        fresh = Graph.load(DATA_DIR, store_dir=tmp_path)
        fresh.load_user("alice")
        assert fresh.check_fact(alice, "sibling_count", 3, user_id="alice").status == "confirmed"
        values = {t.range_value for t in fresh.query(alice, "likes_music", user_id="alice")}
        assert values == {"funk"}

    def test_unseen_user_has_empty_profile(self, graph):
        graph.load_user("nobody-yet")
        assert graph.learned_triples("nobody-yet") == []

    def test_popularity_deltas_survive_restart(self, tmp_path):
        graph = Graph.load(DATA_DIR, store_dir=tmp_path)
        graph.bump_popularity(["tom_hanks", "tom_hanks", "likes"])
        graph.user_entity_id("alice")
        graph.persist("alice")
        fresh = Graph.load(DATA_DIR, store_dir=tmp_path)
        assert fresh.entities["tom_hanks"].popularity == 3
        assert fresh.properties["likes"].popularity == 2


class TestPopularity:
    def test_starts_at_one(self, graph):
        assert graph.popularity("funk") == 1
        assert graph.popularity("likes") == 1

    def test_bump_unknown_id_skipped(self, graph):
        graph.bump_popularity(["no_such_thing"])  # logged, not raised

    @given(st.lists(st.sampled_from(["funk", "jazz", "likes", "born_in"]), max_size=30))
    def test_bumping_never_decreases(self, ids):
        graph = Graph.load(DATA_DIR)
        before = {i: graph.popularity(i) for i in set(ids)}
        graph.bump_popularity(ids)
        for i, old in before.items():
            assert graph.popularity(i) >= old
            assert graph.popularity(i) >= 1
