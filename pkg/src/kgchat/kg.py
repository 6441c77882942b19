"""In-memory triple store: world knowledge, bot profile, learned user facts.

Data lives in three JSONL files (entities, properties, triples). Learned
facts are kept per user as an append-only journal under
``<store_dir>/users/<user_id>.jsonl`` and compacted on load. Popularity
deltas are persisted separately so enrichment ranking survives restarts.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

log = logging.getLogger(__name__)

GENDERS = {"masculine", "feminine", "neuter", "unknown"}
NUMBERS = {"singular", "plural"}
TENSES = {"past", "present", "future"}

USER_ROLE = "User"
BOT_ROLE = "Alquist"


class GraphError(Exception):
    """Base error for graph operations."""


class ParseError(GraphError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class DanglingReferenceError(GraphError):
    def __init__(self, missing_ids):
        super().__init__(f"dangling references: {sorted(missing_ids)}")
        self.missing_ids = sorted(missing_ids)


class UnknownIdError(GraphError):
    """Lookup on an id that does not exist (distinct from an empty result)."""


class RangeKindError(GraphError):
    """Triple value does not match the property's declared range kind."""


@dataclass
class Entity:
    id: str
    canonical_name: str
    aliases: list[str] = field(default_factory=list)
    class_id: str = "thing"
    gender: str = "unknown"
    grammatical_number: str = "singular"
    popularity: float = 1.0
    source: str = "builtin"  # "builtin" or "learned:<user_id>"
    wikidata_id: Optional[str] = None

    def __post_init__(self):
        if not self.id or not self.canonical_name:
            raise ValueError("entity id and canonical_name must be non-empty")
        if self.gender not in GENDERS:
            raise ValueError(f"bad gender {self.gender!r} for {self.id}")
        if self.grammatical_number not in NUMBERS:
            raise ValueError(f"bad number {self.grammatical_number!r} for {self.id}")
        if self.popularity < 1:
            raise ValueError(f"popularity below 1 for {self.id}")


@dataclass
class PropertyDef:
    id: str
    domain_classes: set[str]
    range_kind: str  # "string", "integer", or "entity:<class_id>"
    functional: bool = True
    personalized: bool = False
    popularity: float = 1.0
    word_slots: dict[str, str] = field(default_factory=dict)
    sentence_structures: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.range_kind not in ("string", "integer") and not self.range_kind.startswith("entity:"):
            raise ValueError(f"bad range kind {self.range_kind!r} for {self.id}")
        if self.popularity < 1:
            raise ValueError(f"popularity below 1 for {self.id}")

    @property
    def range_class(self) -> Optional[str]:
        if self.range_kind.startswith("entity:"):
            return self.range_kind.split(":", 1)[1]
        return None


@dataclass(frozen=True)
class Triple:
    domain_id: str
    property_id: str
    range_value: object  # entity id, string literal, or int
    tense: str = "present"
    source: str = "builtin"
    asserted_at: int = 0

    @property
    def user_id(self) -> Optional[str]:
        if self.source.startswith("learned:"):
            return self.source.split(":", 1)[1]
        return None


@dataclass(frozen=True)
class CheckResult:
    status: str  # "confirmed" | "contradicted" | "unknown"
    actual: object = None


@dataclass(frozen=True)
class AssertOutcome:
    status: str  # "stored_new" | "superseded"
    old: Optional[Triple] = None


@dataclass(frozen=True)
class Candidate:
    entity_id: str
    score: float
    source: str  # "private" | "general"


class GeneralResolver:
    """Pluggable backend for names outside the private graph."""

    def resolve(self, surface: str) -> list[Candidate]:
        return []


class StaticResolver(GeneralResolver):
    """Fixture-backed resolver: a flat surface -> external id lexicon."""

    def __init__(self, lexicon: dict[str, str]):
        self.lexicon = {k.lower(): v for k, v in lexicon.items()}

    def resolve(self, surface):
        hit = self.lexicon.get(surface.lower())
        if hit is None:
            return []
        return [Candidate(hit, 0.8, "general")]


def _parse_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, str(exc)) from exc


class Graph:
    """Shared read-mostly graph; mutations serialize through a single lock."""

    FUZZY_FLOOR = 0.5

    def __init__(self, store_dir: Optional[Path] = None,
                 general_resolver: Optional[GeneralResolver] = None,
                 popularity_increment: float = 1.0):
        self.entities: dict[str, Entity] = {}
        self.properties: dict[str, PropertyDef] = {}
        self._builtin: list[Triple] = []
        self._learned: dict[str, list[Triple]] = {}
        self._seq = 0
        self._lock = threading.RLock()
        self.store_dir = Path(store_dir) if store_dir else None
        self.general_resolver = general_resolver or GeneralResolver()
        self.popularity_increment = popularity_increment
        self._base_popularity: dict[str, float] = {}
        self._alias_index: dict[str, list[str]] = {}

    # -- loading ---------------------------------------------------------

    @classmethod
    def load(cls, data_dir: Path, store_dir: Optional[Path] = None, **kwargs) -> "Graph":
        """Load entities/properties/triples from a data directory.

        Raises ParseError with file and line on malformed records and
        DanglingReferenceError when a triple points at an unknown id.
        """
        graph = cls(store_dir=store_dir, **kwargs)
        data_dir = Path(data_dir)
        ent_path = data_dir / "entities.jsonl"
        if ent_path.exists():
            for line_no, rec in _parse_jsonl(ent_path):
                try:
                    graph._add_entity(Entity(
                        id=rec["id"],
                        canonical_name=rec["name"],
                        aliases=list(rec.get("aliases", [])),
                        class_id=rec.get("class", "thing"),
                        gender=rec.get("gender", "unknown"),
                        grammatical_number=rec.get("number", "singular"),
                        popularity=float(rec.get("popularity", 1.0)),
                        wikidata_id=rec.get("wikidata_id"),
                    ))
                except (KeyError, ValueError) as exc:
                    raise ParseError(ent_path, line_no, str(exc)) from exc
        prop_path = data_dir / "properties.jsonl"
        if prop_path.exists():
            for line_no, rec in _parse_jsonl(prop_path):
                try:
                    prop = PropertyDef(
                        id=rec["id"],
                        domain_classes=set(rec.get("domains", [])),
                        range_kind=rec["range"],
                        functional=bool(rec.get("functional", True)),
                        personalized=bool(rec.get("personalized", False)),
                        popularity=float(rec.get("popularity", 1.0)),
                        word_slots=dict(rec.get("words", {})),
                        sentence_structures=dict(rec.get("structures", {})),
                    )
                except (KeyError, ValueError) as exc:
                    raise ParseError(prop_path, line_no, str(exc)) from exc
                graph.properties[prop.id] = prop
        tri_path = data_dir / "triples.jsonl"
        if tri_path.exists():
            for line_no, rec in _parse_jsonl(tri_path):
                try:
                    triple = Triple(
                        domain_id=rec["dom"],
                        property_id=rec["prop"],
                        range_value=rec["ran"],
                        tense=rec.get("tense", "present"),
                        source=rec.get("source", "builtin"),
                        asserted_at=graph._next_seq(),
                    )
                except KeyError as exc:
                    raise ParseError(tri_path, line_no, f"missing field {exc}") from exc
                graph._builtin.append(triple)
        graph.validate_integrity()
        for triple in graph._builtin:
            graph._check_range_kind(triple)
        graph._base_popularity = graph._popularity_snapshot()
        graph._load_popularity_deltas()
        return graph

    def _add_entity(self, entity: Entity):
        if entity.id in self.entities:
            raise ValueError(f"duplicate entity id {entity.id!r}")
        self.entities[entity.id] = entity
        for surface in [entity.canonical_name] + entity.aliases:
            self._alias_index.setdefault(surface.lower(), []).append(entity.id)

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    # -- integrity -------------------------------------------------------

    def validate_integrity(self):
        """Every stored triple's ids must resolve."""
        missing = set()
        for triple in self.iter_triples():
            if triple.domain_id not in self.entities:
                missing.add(triple.domain_id)
            prop = self.properties.get(triple.property_id)
            if prop is None:
                missing.add(triple.property_id)
            elif prop.range_class is not None and triple.range_value not in self.entities:
                missing.add(str(triple.range_value))
        if missing:
            raise DanglingReferenceError(missing)

    def _check_range_kind(self, triple: Triple):
        prop = self.properties[triple.property_id]
        value = triple.range_value
        if prop.range_kind == "integer":
            if not isinstance(value, int) or isinstance(value, bool):
                raise RangeKindError(f"{prop.id} expects an integer, got {value!r}")
        elif prop.range_kind == "string":
            if not isinstance(value, str):
                raise RangeKindError(f"{prop.id} expects a string, got {value!r}")
        else:
            if not isinstance(value, str) or value not in self.entities:
                raise RangeKindError(f"{prop.id} expects an entity id, got {value!r}")

    def iter_triples(self) -> Iterable[Triple]:
        yield from self._builtin
        for triples in self._learned.values():
            yield from triples

    # -- name resolution -------------------------------------------------

    def resolve_name(self, surface: str) -> list[Candidate]:
        """Rank entity candidates for a lowercased surface form.

        Exact canonical match scores 1.0, alias match 0.9, fuzzy matches
        score their token overlap (dropped below the floor). Unknown
        surfaces fall through to the pluggable general resolver.
        """
        if not surface:
            raise ValueError("surface must be non-empty")
        surface = surface.lower().strip()
        results: dict[str, Candidate] = {}
        for ent_id in self._alias_index.get(surface, []):
            entity = self.entities[ent_id]
            score = 1.0 if entity.canonical_name.lower() == surface else 0.9
            prev = results.get(ent_id)
            if prev is None or score > prev.score:
                results[ent_id] = Candidate(ent_id, score, "private")
        if not results:
            tokens = set(surface.split())
            for entity in self.entities.values():
                for name in [entity.canonical_name] + entity.aliases:
                    name_tokens = set(name.lower().split())
                    if not name_tokens:
                        continue
                    overlap = len(tokens & name_tokens) / max(len(tokens), len(name_tokens))
                    if overlap >= self.FUZZY_FLOOR:
                        prev = results.get(entity.id)
                        if prev is None or overlap > prev.score:
                            results[entity.id] = Candidate(entity.id, overlap, "private")
        out = list(results.values())
        out.extend(self.general_resolver.resolve(surface))
        out.sort(key=lambda c: (-c.score, c.entity_id))
        return out

    # -- queries ---------------------------------------------------------

    def _require_ids(self, domain_id: str, property_id: str):
        if domain_id not in self.entities:
            raise UnknownIdError(f"unknown entity id {domain_id!r}")
        if property_id not in self.properties:
            raise UnknownIdError(f"unknown property id {property_id!r}")

    def query(self, domain_id: str, property_id: str, user_id: Optional[str] = None) -> list[Triple]:
        """All current triples for (domain, property), scoped to one user.

        Learned triples belonging to other users never appear; superseded
        learned values are already compacted away at assert time.
        """
        self._require_ids(domain_id, property_id)
        with self._lock:
            out = [t for t in self._builtin
                   if t.domain_id == domain_id and t.property_id == property_id]
            if user_id is not None:
                out.extend(t for t in self._learned.get(user_id, ())
                           if t.domain_id == domain_id and t.property_id == property_id)
        return out

    def check_fact(self, domain_id: str, property_id: str, claimed,
                   user_id: Optional[str] = None) -> CheckResult:
        self._require_ids(domain_id, property_id)
        prop = self.properties[property_id]
        current = self.query(domain_id, property_id, user_id=user_id)
        for triple in current:
            if triple.range_value == claimed:
                return CheckResult("confirmed")
        if current and prop.functional:
            return CheckResult("contradicted", actual=current[-1].range_value)
        return CheckResult("unknown")

    def assert_fact(self, triple: Triple) -> AssertOutcome:
        """Store a learned triple; a functional conflict supersedes the old value."""
        user_id = triple.user_id
        if user_id is None:
            raise GraphError("runtime assertions must carry a learned source")
        self._require_ids(triple.domain_id, triple.property_id)
        self._check_range_kind(triple)
        prop = self.properties[triple.property_id]
        with self._lock:
            triple = replace(triple, asserted_at=self._next_seq())
            mine = self._learned.setdefault(user_id, [])
            old = None
            if prop.functional:
                for existing in mine:
                    if (existing.domain_id == triple.domain_id
                            and existing.property_id == triple.property_id):
                        old = existing
                        break
            if old is not None:
                mine.remove(old)
                mine.append(triple)
                if old.range_value == triple.range_value:
                    return AssertOutcome("stored_new")
                return AssertOutcome("superseded", old=old)
            mine.append(triple)
            return AssertOutcome("stored_new")

    # -- users -----------------------------------------------------------

    def user_entity_id(self, user_id: str) -> str:
        """Entity standing for one user; created lazily on first contact."""
        ent_id = f"user:{user_id}"
        with self._lock:
            if ent_id not in self.entities:
                self._add_entity(Entity(
                    id=ent_id,
                    canonical_name=user_id,
                    class_id="person",
                    source=f"learned:{user_id}",
                ))
        return ent_id

    def learned_triples(self, user_id: str) -> list[Triple]:
        return list(self._learned.get(user_id, ()))

    # -- popularity ------------------------------------------------------

    def popularity(self, ref_id: str) -> float:
        if ref_id in self.entities:
            return self.entities[ref_id].popularity
        if ref_id in self.properties:
            return self.properties[ref_id].popularity
        raise UnknownIdError(f"unknown id {ref_id!r}")

    def bump_popularity(self, ids: list[str]):
        """Increase popularity per mention; unknown ids are skipped with a warning."""
        with self._lock:
            for ref_id in ids:
                if ref_id in self.entities:
                    self.entities[ref_id].popularity += self.popularity_increment
                elif ref_id in self.properties:
                    self.properties[ref_id].popularity += self.popularity_increment
                else:
                    log.warning("bump_popularity: unknown id %r skipped", ref_id)

    def _popularity_snapshot(self) -> dict[str, float]:
        snap = {f"e:{e.id}": e.popularity for e in self.entities.values()}
        snap.update({f"p:{p.id}": p.popularity for p in self.properties.values()})
        return snap

    # -- persistence -----------------------------------------------------

    def _user_store_path(self, user_id: str) -> Path:
        if self.store_dir is None:
            raise GraphError("no writable store directory configured")
        return self.store_dir / "users" / f"{user_id}.jsonl"

    def persist(self, user_id: str):
        """Write the user's learned triples (journal) and popularity deltas."""
        path = self._user_store_path(user_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            triples = self._learned.get(user_id, [])
            with open(path, "w", encoding="utf-8") as fh:
                for t in triples:
                    fh.write(json.dumps({
                        "kind": "triple", "dom": t.domain_id, "prop": t.property_id,
                        "ran": t.range_value, "tense": t.tense, "source": t.source,
                        "seq": t.asserted_at,
                    }) + "\n")
            self._persist_popularity()

    def _persist_popularity(self):
        deltas = {}
        for key, value in self._popularity_snapshot().items():
            if value != self._base_popularity.get(key):
                deltas[key] = value
        pop_path = self.store_dir / "popularity.json"
        tmp = pop_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(deltas, fh)
        tmp.replace(pop_path)

    def _load_popularity_deltas(self):
        if self.store_dir is None:
            return
        pop_path = self.store_dir / "popularity.json"
        if not pop_path.exists():
            return
        with open(pop_path, encoding="utf-8") as fh:
            deltas = json.load(fh)
        for key, value in deltas.items():
            kind, ref_id = key.split(":", 1)
            if kind == "e" and ref_id in self.entities:
                self.entities[ref_id].popularity = max(self.entities[ref_id].popularity, value)
            elif kind == "p" and ref_id in self.properties:
                self.properties[ref_id].popularity = max(self.properties[ref_id].popularity, value)

    def load_user(self, user_id: str):
        """Restore a user's learned facts; never-seen users get an empty profile."""
        if self.store_dir is None:
            return
        path = self._user_store_path(user_id)
        if not path.exists():
            return
        self.user_entity_id(user_id)
        compacted: list[Triple] = []
        for _line_no, rec in _parse_jsonl(path):
            triple = Triple(
                domain_id=rec["dom"], property_id=rec["prop"], range_value=rec["ran"],
                tense=rec.get("tense", "present"), source=rec["source"],
                asserted_at=rec.get("seq", 0),
            )
            prop = self.properties.get(triple.property_id)
            if prop is not None and prop.functional:
                compacted = [t for t in compacted
                             if not (t.domain_id == triple.domain_id
                                     and t.property_id == triple.property_id)]
            compacted.append(triple)
        with self._lock:
            self._learned[user_id] = compacted
            self._seq = max(self._seq, max((t.asserted_at for t in compacted), default=0))
        self.validate_integrity()
