"""Surface realization: placeholders, role pronouns, plurals, verb forms.

Patterns carry ``#DOM#``/``#RAN#`` placeholders, ``<V:verb>`` markers for
agreement-sensitive verbs, and ``<N:noun>`` markers for quantity-bearing
nouns. Realization substitutes bound values, maps the User/Alquist roles
to I/you (my/your in possessive position), re-derives subject-verb
agreement after pronoun substitution, and renders integer ranges as
number words with pluralized nouns.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .kg import BOT_ROLE, USER_ROLE, Entity, Graph

NUMBER_WORDS = [
    "no", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
]

# A preceding token from this set puts a placeholder in object position.
_OBJECT_MARKERS = frozenset({
    "about", "after", "to", "for", "with", "of", "at", "in", "on", "by",
    "from", "than", "is", "are", "was", "were", "like", "love", "have",
    "has", "had", "know", "meet", "see",
})

_VERB_MARK_RE = re.compile(r"<V:([a-z']+)>")
_RAN_NOUN_RE = re.compile(r"#RAN#\s+<N:([a-z']+)>")
_TRAIL_PUNCT_RE = re.compile(r"([.,!?]+)$")

_SUBJECT_PRONOUNS = {"masculine": "he", "feminine": "she", "neuter": "it", "unknown": "they"}
_OBJECT_PRONOUNS = {"masculine": "him", "feminine": "her", "neuter": "it", "unknown": "them"}


class LexicalizationError(Exception):
    pass


def _load_tsv(path: Path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            base, form = line.split("\t", 1)
            out[base.strip().lower()] = form.strip().lower()
    return out


@dataclass
class Lexicons:
    irregular_plurals: dict[str, str]
    irregular_verbs: dict[str, str]  # base -> simple past

    @classmethod
    def load(cls, data_dir: Path) -> "Lexicons":
        data_dir = Path(data_dir)
        return cls(
            irregular_plurals=_load_tsv(data_dir / "irregular_plurals.txt"),
            irregular_verbs=_load_tsv(data_dir / "irregular_verbs.txt"),
        )


DEFAULT_LEXICONS = Lexicons(
    irregular_plurals={"child": "children", "person": "people", "man": "men",
                       "woman": "women", "foot": "feet", "tooth": "teeth",
                       "mouse": "mice", "sheep": "sheep", "fish": "fish"},
    irregular_verbs={"go": "went", "be": "was", "have": "had", "do": "did",
                     "know": "knew", "think": "thought", "see": "saw",
                     "get": "got", "make": "made", "take": "took"},
)


@dataclass(frozen=True)
class RealizationContext:
    user_entity: str
    bot_entity: str
    tense: str = "present"
    already_mentioned: frozenset = frozenset()
    lexicons: Lexicons = DEFAULT_LEXICONS

    def __post_init__(self):
        if self.user_entity == self.bot_entity:
            raise ValueError("user and bot entities must differ")


# -- word-level helpers --------------------------------------------------

def pluralize_noun(noun: str, lexicons: Lexicons = DEFAULT_LEXICONS) -> str:
    irregular = lexicons.irregular_plurals.get(noun.lower())
    if irregular:
        return irregular
    if re.search(r"(s|x|z|ch|sh)$", noun):
        return noun + "es"
    if re.search(r"[^aeiou]y$", noun):
        return noun[:-1] + "ies"
    return noun + "s"


def pluralize_phrase(noun: str, quantity: int,
                     lexicons: Lexicons = DEFAULT_LEXICONS) -> str:
    """Render a counted noun: ("sister", 3) -> "three sisters"."""
    if quantity < 0:
        raise ValueError("quantity must be >= 0")
    word = NUMBER_WORDS[quantity] if quantity <= 20 else str(quantity)
    if quantity == 1:
        return f"{word} {noun}"
    return f"{word} {pluralize_noun(noun, lexicons)}"


def pronominalize(entity: Entity, position: str = "subject") -> str:
    """Third-person pronoun from stored grammatical number and gender."""
    table = _SUBJECT_PRONOUNS if position == "subject" else _OBJECT_PRONOUNS
    if entity.grammatical_number == "plural":
        return "they" if position == "subject" else "them"
    return table[entity.gender]


def third_singular(verb: str) -> str:
    specials = {"be": "is", "have": "has", "do": "does", "go": "goes"}
    if verb in specials:
        return specials[verb]
    if re.search(r"(s|x|z|ch|sh)$", verb):
        return verb + "es"
    if re.search(r"[^aeiou]y$", verb):
        return verb[:-1] + "ies"
    return verb + "s"


def past_form(verb: str, lexicons: Lexicons = DEFAULT_LEXICONS) -> str:
    irregular = lexicons.irregular_verbs.get(verb)
    if irregular:
        return irregular
    if verb.endswith("e"):
        return verb + "d"
    if re.search(r"[^aeiou]y$", verb):
        return verb[:-1] + "ied"
    return verb + "ed"


def _agreement(verb: str, person: str, number: str) -> str:
    if verb == "be":
        if person == "1" and number == "sg":
            return "am"
        if person == "3" and number == "sg":
            return "is"
        return "are"
    if person == "3" and number == "sg":
        return third_singular(verb)
    return verb


def retense(verb: str, tense: str, subject: str, interrogative: bool = False,
            lexicons: Lexicons = DEFAULT_LEXICONS) -> str:
    """Adjust a verb (or its interrogative frame) to the requested tense.

    Interrogative frames return the aux + subject + base form used in
    follow-up questions ("did you study"), declaratives the bare form.
    """
    subject = subject.lower()
    person = "1" if subject in ("i", "we") else "2" if subject == "you" else "3"
    number = "pl" if subject in ("we", "they") else "sg"
    if interrogative:
        if tense == "past":
            aux = "did"
        elif tense == "future":
            aux = "will"
        else:
            aux = "does" if (person, number) == ("3", "sg") else "do"
        return f"{aux} {subject} {verb}"
    if tense == "past":
        return past_form(verb, lexicons)
    if tense == "future":
        return f"will {verb}"
    return _agreement(verb, person, number)


# -- sentence realization ------------------------------------------------

def _value_descriptor(value, graph: Graph) -> tuple[str, str]:
    """(person, number) of a bound value, for verb agreement."""
    if value == BOT_ROLE:
        return ("1", "sg")
    if value == USER_ROLE:
        return ("2", "sg")
    if isinstance(value, int):
        return ("3", "sg" if value == 1 else "pl")
    if isinstance(value, str) and value in graph.entities:
        ent = graph.entities[value]
        return ("3", "pl" if ent.grammatical_number == "plural" else "sg")
    return ("3", "sg")


def _render_value(value, position: str, possessive: bool,
                  context: RealizationContext, graph: Graph,
                  mentioned: list[str]) -> str:
    if value == BOT_ROLE or value == context.bot_entity:
        return "my" if possessive else ("I" if position == "subject" else "me")
    if value == USER_ROLE or value == context.user_entity:
        return "your" if possessive else "you"
    if isinstance(value, int):
        return NUMBER_WORDS[value] if 0 <= value <= 20 else str(value)
    if isinstance(value, str) and value in graph.entities:
        entity = graph.entities[value]
        if value in context.already_mentioned or value in mentioned:
            pronoun = pronominalize(entity, position)
            if possessive:
                return {"he": "his", "she": "her", "it": "its", "they": "their",
                        "him": "his", "her": "her", "them": "their"}[pronoun]
            return pronoun
        mentioned.append(value)
        name = entity.canonical_name
        return name + "'s" if possessive else name
    # plain string literal
    return str(value) + "'s" if possessive else str(value)


def realize_with_mentions(pattern: str, bindings: dict, context: RealizationContext,
                          graph: Graph) -> tuple[str, list[str]]:
    """Realize a pattern; also report which entities the sentence names."""
    mentioned: list[str] = []
    # quantity-bearing noun: "#RAN# <N:sibling>" -> "three siblings"
    ran = bindings.get("ran")
    def _qty(match):
        if not isinstance(ran, int):
            raise LexicalizationError(f"quantity marker needs integer range, got {ran!r}")
        return pluralize_phrase(match.group(1), ran, context.lexicons)
    pattern = _RAN_NOUN_RE.sub(_qty, pattern)

    tokens = pattern.split()
    out: list[str] = []
    prev_core = ""
    subject_desc: Optional[tuple[str, str]] = None
    verb_slots: list[int] = []
    for token in tokens:
        m = _TRAIL_PUNCT_RE.search(token)
        trail = m.group(1) if m else ""
        core = token[: len(token) - len(trail)] if trail else token
        rendered = core
        lowered = core.lower()
        if lowered in ("#dom#", "#ran#", "#dom#'s", "#ran#'s"):
            role = lowered[1:4]
            possessive = lowered.endswith("'s")
            if role not in bindings or bindings[role] is None:
                raise LexicalizationError(f"unbound placeholder #{role.upper()}# in {pattern!r}")
            value = bindings[role]
            position = "object" if prev_core.lower() in _OBJECT_MARKERS \
                or _VERB_MARK_RE.fullmatch(prev_core) else "subject"
            rendered = _render_value(value, position, possessive, context, graph, mentioned)
            if role == "dom" and subject_desc is None:
                subject_desc = _value_descriptor(value, graph)
        elif _VERB_MARK_RE.fullmatch(core):
            verb_slots.append(len(out))
        out.append(rendered + trail)
        prev_core = core
    # agreement pass, now that the subject's person/number is known
    person, number = subject_desc or ("3", "sg")
    for idx in verb_slots:
        m = _TRAIL_PUNCT_RE.search(out[idx])
        trail = m.group(1) if m else ""
        verb = _VERB_MARK_RE.fullmatch(out[idx][: len(out[idx]) - len(trail)] or out[idx]).group(1)
        out[idx] = _agreement(verb, person, number) + trail

    text = " ".join(out)
    if "#" in text or "<" in text:
        raise LexicalizationError(f"placeholder leakage in realized text: {text!r}")
    text = _capitalize(text)
    if not _TRAIL_PUNCT_RE.search(text):
        text += "."
    return text, mentioned


def realize(pattern: str, bindings: dict, context: RealizationContext,
            graph: Graph) -> str:
    return realize_with_mentions(pattern, bindings, context, graph)[0]


def _capitalize(text: str) -> str:
    for i, ch in enumerate(text):
        if ch.isalpha():
            return text[:i] + ch.upper() + text[i + 1:]
    return text
