"""Pluggable NLU analyzer suite with deterministic rule baselines."""

from .segmentation import Hypothesis, Segment, RuleTables, restore_punctuation, segment
from .analyzers import (
    Mention,
    SegmentAnnotations,
    DialogueActAnalyzer,
    EntityLinkAnalyzer,
    PropertyAnalyzer,
    TenseAnalyzer,
)
from .suite import NluSuite

__all__ = [
    "Hypothesis", "Segment", "RuleTables", "restore_punctuation", "segment",
    "Mention", "SegmentAnnotations", "DialogueActAnalyzer", "EntityLinkAnalyzer",
    "PropertyAnalyzer", "TenseAnalyzer", "NluSuite",
]
