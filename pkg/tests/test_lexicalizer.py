import pytest
from hypothesis import given, strategies as st

from kgchat.kg import BOT_ROLE, USER_ROLE, Entity
from kgchat.lexicalizer import (
    DEFAULT_LEXICONS,
    LexicalizationError,
    RealizationContext,
    past_form,
    pluralize_noun,
    pluralize_phrase,
    pronominalize,
    realize,
    realize_with_mentions,
    retense,
    third_singular,
)


@pytest.fixture()
def ctx(graph):
    return RealizationContext(user_entity=graph.user_entity_id("alice"),
                              bot_entity="alquist")


class TestWords:
    @pytest.mark.parametrize("noun,plural", [
        ("sister", "sisters"), ("box", "boxes"), ("city", "cities"),
        ("child", "children"), ("person", "people"), ("sheep", "sheep"),
        ("boy", "boys"),
    ])
    def test_pluralize_noun(self, noun, plural):
        assert pluralize_noun(noun) == plural

    @pytest.mark.parametrize("qty,phrase", [
        (0, "no sisters"), (1, "one sister"), (2, "two sisters"),
        (3, "three sisters"), (20, "twenty sisters"), (21, "21 sisters"),
    ])
    def test_pluralize_phrase(self, qty, phrase):
        assert pluralize_phrase("sister", qty) == phrase

    def test_negative_quantity_rejected(self):
        with pytest.raises(ValueError):
            pluralize_phrase("sister", -1)

    @pytest.mark.parametrize("verb,form", [
        ("like", "likes"), ("go", "goes"), ("have", "has"), ("do", "does"),
        ("be", "is"), ("watch", "watches"), ("study", "studies"),
    ])
    def test_third_singular(self, verb, form):
        assert third_singular(verb) == form

    @pytest.mark.parametrize("verb,form", [
        ("study", "studied"), ("like", "liked"), ("go", "went"),
        ("see", "saw"), ("play", "played"),
    ])
    def test_past_form(self, verb, form):
        assert past_form(verb) == form


class TestPronouns:
    @pytest.mark.parametrize("gender,number,subject,obj", [
        ("masculine", "singular", "he", "him"),
        ("feminine", "singular", "she", "her"),
        ("neuter", "singular", "it", "it"),
        ("unknown", "singular", "they", "them"),
        ("masculine", "plural", "they", "them"),
    ])
    def test_table(self, gender, number, subject, obj):
        entity = Entity(id="x", canonical_name="X", gender=gender,
                        grammatical_number=number)
        assert pronominalize(entity, "subject") == subject
        assert pronominalize(entity, "object") == obj


class TestRetense:
    def test_interrogative_past_frame(self):
        assert retense("study", "past", "you", interrogative=True) == "did you study"

    def test_interrogative_present_frame(self):
        assert retense("study", "present", "you", interrogative=True) == "do you study"
        assert retense("study", "present", "she", interrogative=True) == "does she study"

    def test_interrogative_future_frame(self):
        assert retense("study", "future", "you", interrogative=True) == "will you study"

    def test_declarative_forms(self):
        assert retense("study", "past", "you") == "studied"
        assert retense("study", "present", "she") == "studies"
        assert retense("be", "present", "i") == "am"
        assert retense("study", "future", "they") == "will study"


class TestRealization:
    def test_agreement_follows_third_person_subject(self, graph, ctx):
        text = realize("#DOM# <V:love> to talk about #RAN#.",
                       {"dom": "karel_capek", "ran": "robots"}, ctx, graph)
        assert text == "Karel Čapek loves to talk about robots."

    def test_roles_become_first_and_second_person(self, graph, ctx):
        text = realize("Yes, #DOM# <V:love> #RAN#!",
                       {"dom": BOT_ROLE, "ran": "music"}, ctx, graph)
        assert text == "Yes, I love music!"
        text = realize("#DOM# <V:have> #RAN# <N:sibling>, right?",
                       {"dom": USER_ROLE, "ran": 3}, ctx, graph)
        assert text == "You have three siblings, right?"

    def test_possessive_roles(self, graph, ctx):
        text = realize("#DOM#'s favorite movie is #RAN#.",
                       {"dom": BOT_ROLE, "ran": "the_matrix_film"}, ctx, graph)
        assert text == "My favorite movie is Matrix."

    def test_zero_quantity(self, graph, ctx):
        text = realize("#DOM# <V:have> #RAN# <N:sibling>.",
                       {"dom": USER_ROLE, "ran": 0}, ctx, graph)
        assert text == "You have no siblings."

    def test_repeat_mention_becomes_pronoun(self, graph, ctx):
        text, mentioned = realize_with_mentions(
            "Did you know that the synthetic element #DOM# is named after #RAN#?",
            {"dom": "nobelium", "ran": "alfred_nobel"},
            RealizationContext(user_entity=ctx.user_entity, bot_entity=ctx.bot_entity,
                               already_mentioned=frozenset({"alfred_nobel"})),
            graph)
        assert text.endswith("named after him?")
        assert mentioned == ["nobelium"]

    def test_feminine_object_pronoun(self, graph, ctx):
        text = realize(
            "Did you know that the synthetic element #DOM# is named after #RAN#?",
            {"dom": "curium", "ran": "marie_curie"},
            RealizationContext(user_entity=ctx.user_entity, bot_entity=ctx.bot_entity,
                               already_mentioned=frozenset({"marie_curie"})),
            graph)
        assert "after her?" in text

    def test_unbound_placeholder_raises(self, graph, ctx):
        with pytest.raises(LexicalizationError):
            realize("#DOM# likes #RAN#.", {"dom": "funk"}, ctx, graph)

    def test_leakage_guard(self, graph, ctx):
        with pytest.raises(LexicalizationError):
            realize("#DOM# <V:Verb> stuff.", {"dom": BOT_ROLE}, ctx, graph)

    def test_user_and_bot_must_differ(self):
        with pytest.raises(ValueError):
            RealizationContext(user_entity="same", bot_entity="same")

    def test_sentence_always_terminated_and_capitalized(self, graph, ctx):
        text = realize("#DOM# was born in #RAN#",
                       {"dom": "alfred_nobel", "ran": "sweden"}, ctx, graph)
        assert text == "Alfred Nobel was born in Sweden."

    @given(st.integers(min_value=0, max_value=60))
    def test_quantities_render_words_up_to_twenty(self, qty):
        phrase = pluralize_phrase("sister", qty)
        first = phrase.split()[0]
        if qty <= 20:
            assert not first.isdigit()
        else:
            assert first == str(qty)
