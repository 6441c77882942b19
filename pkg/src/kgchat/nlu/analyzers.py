"""Batch-first analyzer baselines: dialogue acts, entities, properties, tense.

Each analyzer is an interchangeable component with a batch entry point so
learned models can replace the rule baselines without pipeline changes.
All baselines are pure functions of (input, graph snapshot, rule tables).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..acts import DialogueAct, INVALID_OTHER
from ..kg import Graph, Candidate
from ..templates import PatternIndex
from .segmentation import RuleTables, Segment

DEFAULT_TOP_K = 3

NUMBER_WORDS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
    "twenty": 20, "no": 0,
}


def parse_quantity(text: str) -> Optional[int]:
    text = text.strip().lower()
    if text.isdigit():
        return int(text)
    return NUMBER_WORDS.get(text)


@dataclass(frozen=True)
class Mention:
    span: tuple[int, int]
    text: str
    candidates: tuple[Candidate, ...]


@dataclass(frozen=True)
class PropertyHypothesis:
    property_id: str
    confidence: float
    dom_span: Optional[tuple[int, int]] = None
    ran_span: Optional[tuple[int, int]] = None


@dataclass
class SegmentAnnotations:
    dialogue_acts: list[tuple[DialogueAct, float]] = field(default_factory=list)
    mentions: list[Mention] = field(default_factory=list)
    properties: list[PropertyHypothesis] = field(default_factory=list)
    tense: str = "present"


class _Counted:
    """Invocation bookkeeping shared by all analyzers (batching contract)."""

    name = "analyzer"

    def __init__(self):
        self.calls = 0
        self.last_batch_size = 0

    def _tick(self, batch):
        self.calls += 1
        self.last_batch_size = len(batch)


class DialogueActAnalyzer(_Counted):
    name = "dialogue_act"

    def __init__(self, index: PatternIndex, k: int = DEFAULT_TOP_K):
        super().__init__()
        self.index = index
        self.k = k

    #: factor applied when a pattern's act disagrees with the restored
    #: terminal punctuation (question pattern on a statement or vice versa)
    PUNCT_MISMATCH = 0.8

    def annotate(self, segments: list[Segment]) -> list[list[tuple[DialogueAct, float]]]:
        self._tick(segments)
        return [self._classify(s.text, s.terminal_punct) for s in segments]

    def _classify(self, text: str,
                  terminal_punct: str = "period") -> list[tuple[DialogueAct, float]]:
        is_question = terminal_punct == "question"
        best: dict[str, tuple[DialogueAct, float]] = {}
        for m in self.index.match(text):
            confidence = m.confidence
            if (m.act.t2 == "Que") != is_question:
                confidence = round(confidence * self.PUNCT_MISMATCH, 6)
            prev = best.get(m.act.label)
            if prev is None or confidence > prev[1]:
                best[m.act.label] = (m.act, confidence)
        ranked = sorted(best.values(), key=lambda p: (-p[1], p[0].label))
        if not ranked:
            return [(INVALID_OTHER, 0.1)]
        return ranked[:self.k]


class EntityLinkAnalyzer(_Counted):
    """Longest-match lexicon scan over canonical names and aliases."""

    name = "entity_link"
    MAX_NGRAM = 4

    def __init__(self, graph: Graph):
        super().__init__()
        self.graph = graph

    def annotate(self, segments: list[Segment]) -> list[list[Mention]]:
        self._tick(segments)
        return [self._link(s.text) for s in segments]

    def _link(self, text: str) -> list[Mention]:
        tokens = text.split()
        offsets = []
        pos = 0
        for tok in tokens:
            start = text.index(tok, pos)
            offsets.append((start, start + len(tok)))
            pos = start + len(tok)
        mentions: list[Mention] = []
        i = 0
        while i < len(tokens):
            hit = None
            for n in range(min(self.MAX_NGRAM, len(tokens) - i), 0, -1):
                surface = " ".join(tokens[i:i + n])
                if surface in self.graph._alias_index:
                    candidates = tuple(self.graph.resolve_name(surface))
                    if candidates:
                        hit = (n, surface, candidates)
                        break
            if hit is None:
                i += 1
                continue
            n, surface, candidates = hit
            span = (offsets[i][0], offsets[i + n - 1][1])
            mentions.append(Mention(span, surface, candidates))
            i += n
        return mentions


class PropertyAnalyzer(_Counted):
    """Sentence-structure patterns with greedy placeholder binding."""

    name = "property"

    def __init__(self, index: PatternIndex, k: int = DEFAULT_TOP_K):
        super().__init__()
        self.index = index
        self.k = k

    def annotate(self, segments: list[Segment]) -> list[list[PropertyHypothesis]]:
        self._tick(segments)
        return [self._detect(s.text) for s in segments]

    def _detect(self, text: str) -> list[PropertyHypothesis]:
        best: dict[str, PropertyHypothesis] = {}
        for m in self.index.match(text):
            if m.property_id is None:
                continue
            prev = best.get(m.property_id)
            if prev is None or m.confidence > prev.confidence:
                best[m.property_id] = PropertyHypothesis(
                    m.property_id, m.confidence, m.dom_span, m.ran_span)
        ranked = sorted(best.values(), key=lambda h: (-h.confidence, h.property_id))
        return ranked[:self.k]


class TenseAnalyzer(_Counted):
    name = "tense"
    _FUTURE_RE = re.compile(r"\b(will|gonna|going to)\s+\w+")

    def __init__(self, rules: RuleTables):
        super().__init__()
        self.rules = rules

    def annotate(self, segments: list[Segment]) -> list[str]:
        self._tick(segments)
        return [self.classify(s.text) for s in segments]

    def classify(self, text: str) -> str:
        text = text.lower()
        if self._FUTURE_RE.search(text):
            return "future"
        for token in text.split():
            if token in self.rules.irregular_past:
                return "past"
            if len(token) > 3 and token.endswith("ed"):
                return "past"
        return "present"
