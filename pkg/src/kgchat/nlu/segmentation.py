"""Punctuation restoration and clause segmentation.

Input arrives as lowercase, punctuation-free ASR text. A rule cascade
restores sentence-final punctuation (period/question) and clause commas,
then segments split at the restored sentence marks. The rule tables are
data files so the restorer can be swapped for a learned model without
touching the contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

# Leading interjections attach to the following clause with a comma
# instead of opening their own segment.
INTERJECTIONS = frozenset({"hey", "oh", "ah", "well", "um", "uh", "hmm"})

# Formality words that open a fresh clause mid-utterance.
FORMALITY_OPENERS = frozenset({"thanks", "thank", "hello", "hi", "goodbye", "bye"})

WH_WORDS = frozenset({
    "who", "what", "when", "where", "why", "how", "which", "whose",
    "what's", "who's", "where's", "how's", "when's",
})

PRONOUNS = frozenset({"i", "you", "we", "they", "he", "she", "it", "your", "my"})

# Verb evidence used by the clause-split rule ("and" splits only between
# two verb-bearing clauses, so "tom and jerry" stays whole).
VERB_CUES = frozenset({
    "is", "are", "was", "were", "am", "be", "been", "do", "does", "did",
    "have", "has", "had", "can", "could", "will", "would", "should",
    "like", "love", "hate", "want", "know", "think", "go", "goes", "went",
    "see", "say", "said", "get", "got", "make", "made", "feel", "felt",
    "happened", "study", "studied", "live", "lived", "work", "worked",
    "don't", "doesn't", "didn't", "won't", "can't", "it's", "that's",
    "i'm", "you're", "what's",
})


@dataclass(frozen=True)
class Hypothesis:
    text: str
    asr_confidence: float = 1.0

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("hypothesis text must be non-empty")
        if not 0 < self.asr_confidence <= 1:
            raise ValueError("asr_confidence must be in (0, 1]")


@dataclass(frozen=True)
class Segment:
    hypothesis_index: int
    segment_index: int
    text: str
    terminal_punct: str  # "period" | "question"


def _load_words(path: Path) -> frozenset:
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return frozenset(words)


@dataclass
class RuleTables:
    question_cues: frozenset
    split_cues: frozenset
    irregular_past: frozenset

    @classmethod
    def load(cls, data_dir: Path) -> "RuleTables":
        data_dir = Path(data_dir)
        return cls(
            question_cues=_load_words(data_dir / "question_cues.txt"),
            split_cues=_load_words(data_dir / "split_cues.txt"),
            irregular_past=_load_words(data_dir / "irregular_past.txt"),
        )

    @property
    def aux_cues(self) -> frozenset:
        return self.question_cues - WH_WORDS


def _looks_like_verb(token: str) -> bool:
    return (token in VERB_CUES
            or (len(token) > 4 and token.endswith("ing"))
            or (len(token) > 3 and token.endswith("ed")))


def _has_verb(tokens: list[str]) -> bool:
    return any(_looks_like_verb(t) for t in tokens)


def _content(clause: list[str]) -> list[str]:
    """Clause tokens with leading interjections and connectives stripped."""
    i = 0
    while i < len(clause) and (clause[i] in INTERJECTIONS
                               or clause[i] in ("and", "but", "so", "because")):
        i += 1
    return clause[i:]


def _terminal_for(clause: list[str], rules: RuleTables) -> str:
    content = _content(clause)
    if clause and clause[-1] == "right":
        return "question"
    if content and content[0] in rules.question_cues:
        return "question"
    return "period"


def restore_punctuation(tokens: list[str], rules: RuleTables) -> list[tuple[str, str]]:
    """Assign the punctuation mark following each word.

    Returns (word, punct) pairs with punct in {none, comma, period,
    question}. The last word always receives period or question.
    """
    if not tokens:
        raise ValueError("tokens must be non-empty")
    tokens = [t.lower() for t in tokens]
    punct = ["none"] * len(tokens)
    start = 0
    for i in range(1, len(tokens)):
        token = tokens[i]
        clause = tokens[start:i]
        content = _content(clause)
        trigger = False
        if token in WH_WORDS:
            trigger = True
        elif token in FORMALITY_OPENERS:
            trigger = True
        elif token in rules.split_cues:
            trigger = _has_verb(clause) and _has_verb(tokens[i:])
        elif (token in rules.aux_cues and i + 1 < len(tokens)
              and tokens[i + 1] in PRONOUNS
              and not (content and content[0] in rules.question_cues)):
            trigger = True
        if not trigger:
            continue
        if not content:
            # interjection-only prefix: join with a comma, keep the clause
            if punct[i - 1] == "none":
                punct[i - 1] = "comma"
            continue
        punct[i - 1] = _terminal_for(clause, rules)
        start = i
    punct[-1] = _terminal_for(tokens[start:], rules)
    return list(zip(tokens, punct))


def segment(hypothesis: Hypothesis, rules: RuleTables,
            hypothesis_index: int = 0) -> list[Segment]:
    """Split a hypothesis at restored sentence marks (commas never split)."""
    marked = restore_punctuation(hypothesis.text.split(), rules)
    segments: list[Segment] = []
    current: list[str] = []
    for word, punct in marked:
        current.append(word)
        if punct in ("period", "question"):
            segments.append(Segment(
                hypothesis_index=hypothesis_index,
                segment_index=len(segments),
                text=" ".join(current),
                terminal_punct=punct,
            ))
            current = []
    if current:  # defensive: restore_punctuation always terminates the last word
        segments.append(Segment(hypothesis_index, len(segments),
                                " ".join(current), "period"))
    return segments
