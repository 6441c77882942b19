"""Batched NLU execution: segment once, run each analyzer once per turn.

Batching is a pure optimization; outputs are identical to invoking each
analyzer per segment. Per-segment analyzer failures degrade to an
invalid-act annotation instead of aborting the turn.
"""

from __future__ import annotations

import logging
from typing import Optional

from ..acts import INVALID_OTHER
from ..kg import Graph
from ..templates import PatternIndex
from .analyzers import (
    DialogueActAnalyzer,
    EntityLinkAnalyzer,
    PropertyAnalyzer,
    SegmentAnnotations,
    TenseAnalyzer,
    DEFAULT_TOP_K,
)
from .segmentation import Hypothesis, RuleTables, Segment, segment

log = logging.getLogger(__name__)

DEFAULT_MAX_HYPOTHESES = 5


class NluSuite:
    def __init__(self, graph: Graph, index: PatternIndex, rules: RuleTables,
                 k: int = DEFAULT_TOP_K, max_hypotheses: int = DEFAULT_MAX_HYPOTHESES):
        self.rules = rules
        self.max_hypotheses = max_hypotheses
        self.dialogue_acts = DialogueActAnalyzer(index, k=k)
        self.entities = EntityLinkAnalyzer(graph)
        self.properties = PropertyAnalyzer(index, k=k)
        self.tense = TenseAnalyzer(rules)

    @property
    def analyzers(self):
        return (self.dialogue_acts, self.entities, self.properties, self.tense)

    def invocation_counts(self) -> dict[str, int]:
        return {a.name: a.calls for a in self.analyzers}

    def reset_counts(self):
        for analyzer in self.analyzers:
            analyzer.calls = 0
            analyzer.last_batch_size = 0

    def annotate_batch(self, hypotheses: list[Hypothesis]
                       ) -> list[tuple[Segment, SegmentAnnotations]]:
        if not 1 <= len(hypotheses) <= self.max_hypotheses:
            raise ValueError(
                f"expected 1..{self.max_hypotheses} hypotheses, got {len(hypotheses)}")
        segments: list[Segment] = []
        for h_idx, hyp in enumerate(hypotheses):
            segments.extend(segment(hyp, self.rules, hypothesis_index=h_idx))
        das = self._safe(self.dialogue_acts.annotate, segments,
                         default=lambda: [(INVALID_OTHER, 0.1)])
        mentions = self._safe(self.entities.annotate, segments, default=list)
        props = self._safe(self.properties.annotate, segments, default=list)
        tenses = self._safe(self.tense.annotate, segments, default=lambda: "present")
        out = []
        for i, seg in enumerate(segments):
            out.append((seg, SegmentAnnotations(
                dialogue_acts=das[i],
                mentions=mentions[i],
                properties=props[i],
                tense=tenses[i],
            )))
        return out

    @staticmethod
    def _safe(call, segments, default):
        try:
            results = call(segments)
            if len(results) != len(segments):
                raise ValueError("analyzer returned wrong batch size")
            return results
        except Exception:
            log.exception("analyzer %s failed; degrading batch", call)
            return [default() for _ in segments]
