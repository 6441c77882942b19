"""Three-level template system: words, sentence structures, DA patterns.

A sentence structure is a named pattern skeleton (``What is #DOM#'s
<ObjectNoun>?``) that encodes a dialogue act. Properties fill skeletons
from their word slots, or override the whole pattern per structure.
Realized patterns double as the training-free dialogue-act matcher: every
(property, structure) realization becomes a delexicalized match pattern.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .acts import DialogueAct
from .kg import Graph, PropertyDef

PLACEHOLDER_ALIASES = {"#DOMAIN#": "#DOM#", "#RANGE#": "#RAN#"}

_CATEGORY_RE = re.compile(r"<(V:)?([A-Za-z]+)>")
_VERB_MARK_RE = re.compile(r"<V:([a-z']+)>")
_NOUN_MARK_RE = re.compile(r"<N:([a-z']+)>")


class TemplateError(Exception):
    pass


class MissingSlotError(TemplateError):
    def __init__(self, property_id, structure, category):
        super().__init__(
            f"property {property_id!r} cannot realize structure {structure!r}: "
            f"missing word slot {category!r} and no pattern override")
        self.property_id = property_id
        self.structure = structure
        self.category = category


def normalize_pattern(pattern: str) -> str:
    for alias, canonical in PLACEHOLDER_ALIASES.items():
        pattern = pattern.replace(alias, canonical)
    return pattern


@dataclass(frozen=True)
class StructureType:
    name: str
    encodes_da: DialogueAct
    asks_question: bool
    skeleton: Optional[str] = None

    def __post_init__(self):
        expect = self.encodes_da.t2 == "Que" or self.name == "Forward_Question"
        if self.asks_question != expect:
            raise TemplateError(
                f"structure {self.name}: asks_question must be {expect} "
                f"for act {self.encodes_da}")


class StructureRegistry:
    """Closed registry of structure types, loaded from structures.json."""

    def __init__(self, structures: list[StructureType]):
        self.by_name = {s.name: s for s in structures}

    def __contains__(self, name):
        return name in self.by_name

    def __getitem__(self, name) -> StructureType:
        return self.by_name[name]

    def __iter__(self):
        return iter(self.by_name.values())

    @classmethod
    def load(cls, path: Path) -> "StructureRegistry":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        structures = []
        for rec in raw["structures"]:
            structures.append(StructureType(
                name=rec["name"],
                encodes_da=DialogueAct.parse(rec["da"]),
                asks_question=bool(rec["asks_question"]),
                skeleton=normalize_pattern(rec["skeleton"]) if rec.get("skeleton") else None,
            ))
        return cls(structures)


def realize_structure(structure: StructureType, prop: Optional[PropertyDef] = None) -> str:
    """Assemble the pattern for one (structure, property) combination.

    A property-specific pattern override wins; otherwise the structure
    skeleton is filled from the property's word slots. Matching the
    authored response lines exactly requires the override to take
    precedence over slot assembly. Property-free structures (pure
    formalities) realize straight from their skeleton.
    """
    if prop is not None:
        override = prop.sentence_structures.get(structure.name)
        if override is not None:
            return normalize_pattern(override)
    prop_id = prop.id if prop is not None else None
    if structure.skeleton is None:
        raise MissingSlotError(prop_id, structure.name, "<pattern>")
    pattern = structure.skeleton
    for marker, category in _CATEGORY_RE.findall(pattern):
        if not category[0].isupper():
            continue  # already a resolved lexicalizer marker like <V:like>
        word = prop.word_slots.get(category) if prop is not None else None
        if word is None:
            raise MissingSlotError(prop_id, structure.name, category)
        replacement = f"<V:{word}>" if marker else word
        pattern = pattern.replace(f"<{marker}{category}>", replacement)
    return pattern


@dataclass(frozen=True)
class DaPattern:
    pattern: str
    act: DialogueAct
    property_id: Optional[str]
    structure: Optional[str] = None


def to_match_form(pattern: str) -> str:
    """Strip lexicalizer markers down to base words for matching."""
    pattern = _VERB_MARK_RE.sub(r"\1", pattern)
    pattern = _NOUN_MARK_RE.sub(r"\1", pattern)
    return pattern


def generate_da_patterns(graph: Graph, registry: StructureRegistry,
                         report: Optional[list] = None) -> list[DaPattern]:
    """One delexicalized pattern per (property, structure) that realizes.

    Realization failures are collected into ``report`` rather than raised:
    most properties only support a few structures.
    """
    out: list[DaPattern] = []
    seen: set[tuple[str, str, str]] = set()
    for prop in graph.properties.values():
        names = set(prop.sentence_structures)
        for structure in registry:
            if structure.skeleton is not None:
                names.add(structure.name)
        for name in sorted(names):
            if name not in registry:
                if report is not None:
                    report.append((prop.id, name, "unknown structure type"))
                continue
            structure = registry[name]
            try:
                pattern = to_match_form(realize_structure(structure, prop))
            except MissingSlotError as exc:
                if report is not None:
                    report.append((prop.id, name, str(exc)))
                continue
            if _CATEGORY_RE.search(pattern):
                if report is not None:
                    report.append((prop.id, name, "unresolved category token"))
                continue
            lowered = pattern.lower()
            # a pattern without placeholders cannot ground a property;
            # tagging it would make every formality detect that property
            prop_tag = prop.id if ("#dom#" in lowered or "#ran#" in lowered) else None
            # keyed per property: two properties sharing a surface pattern
            # must both stay detectable by the property analyzer
            key = (lowered, structure.encodes_da.label, prop_tag)
            if key in seen:
                continue
            seen.add(key)
            out.append(DaPattern(pattern, structure.encodes_da, prop_tag, name))
    return out


# -- pattern matching ----------------------------------------------------

_PUNCT_RE = re.compile(r"[.,!?;]")


def _pattern_tokens(pattern: str) -> list[str]:
    return _PUNCT_RE.sub(" ", pattern).lower().split()


@dataclass
class CompiledPattern:
    source: DaPattern
    regex: re.Pattern
    n_words: int


@dataclass(frozen=True)
class PatternMatch:
    act: DialogueAct
    property_id: Optional[str]
    confidence: float
    dom_span: Optional[tuple[int, int]] = None
    ran_span: Optional[tuple[int, int]] = None
    structure: Optional[str] = None


def compile_pattern(entry: DaPattern) -> Optional[CompiledPattern]:
    tokens = _pattern_tokens(entry.pattern)
    if not tokens:
        return None
    parts = []
    seen_groups = set()
    for token in tokens:
        if token in ("#dom#", "#ran#"):
            role = token[1:4]
            if role in seen_groups:
                return None  # repeated placeholder: unsupported
            seen_groups.add(role)
            parts.append(f"(?P<{role}>.+)")
        elif token in ("#dom#'s", "#ran#'s"):
            role = token[1:4]
            if role in seen_groups:
                return None
            seen_groups.add(role)
            parts.append(f"(?P<{role}>your|my|.+'s)")
        else:
            parts.append(re.escape(token))
    regex = re.compile(r"(?<!\S)" + r"\s+".join(parts) + r"(?!\S)")
    return CompiledPattern(entry, regex, len(tokens))


class PatternIndex:
    """Immutable snapshot of compiled DA/property patterns plus a closed-class lexicon."""

    def __init__(self, patterns: list[DaPattern], lexicon: list[DaPattern]):
        self.entries: list[CompiledPattern] = []
        for entry in list(patterns) + list(lexicon):
            compiled = compile_pattern(entry)
            if compiled is not None:
                self.entries.append(compiled)

    def match(self, text: str) -> list[PatternMatch]:
        """All pattern hits in a segment, scored by matched-token coverage."""
        text = text.strip().lower()
        total = len(text.split())
        if total == 0:
            return []
        out = []
        for compiled in self.entries:
            m = compiled.regex.search(text)
            if m is None:
                continue
            matched_words = len(text[m.start():m.end()].split())
            coverage = matched_words / total
            dom_span = _group_span(m, "dom")
            ran_span = _group_span(m, "ran")
            out.append(PatternMatch(
                act=compiled.source.act,
                property_id=compiled.source.property_id,
                confidence=round(coverage, 6),
                dom_span=dom_span,
                ran_span=ran_span,
                structure=compiled.source.structure,
            ))
        return out


def _group_span(match: re.Match, name: str) -> Optional[tuple[int, int]]:
    if name not in match.re.groupindex:
        return None
    start, end = match.span(name)
    if start < 0:
        return None
    text = match.string[start:end]
    if text.endswith("'s"):
        end -= 2
    return (start, end)


def load_da_lexicon(path: Path) -> list[DaPattern]:
    """Closed-class phrases for acts with no property binding."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            label, phrase = line.split("\t", 1)
            out.append(DaPattern(phrase.strip(), DialogueAct.parse(label), None))
    return out
