"""Candidate action creation, enrichment generation, and selection.

Actions are candidate reactions built from the cross product of NLU
hypotheses, filtered by knowledge-graph structure: the bound entity must
fit the property's domain/range classes and some adjacency pair must
trigger on the (dialogue act, property) combination. The selector picks
one action per segment maximizing total confidence under two constraints:
no two selected actions share an adjacency pair, and at most one selected
action asks a question.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .acts import DialogueAct
from .kg import BOT_ROLE, USER_ROLE, Graph
from .nlu.analyzers import Mention, SegmentAnnotations, parse_quantity
from .pairs import PairRegistry, match_pair

log = logging.getLogger(__name__)

DEFAULT_CONFIDENCE_THRESHOLD = 0.05
EXHAUSTIVE_BOUND = 10_000
FALLBACK_PAIR_ID = "acknowledge"

ROLE_SURFACES_BOT = frozenset({"you", "your", "yours", "alquist"})
ROLE_SURFACES_USER = frozenset({"i", "me", "my", "mine"})


@dataclass(frozen=True)
class Action:
    segment_ref: tuple[int, int]
    kind: str  # "handle" | "funfact" | "forward"
    da: DialogueAct
    pair_id: str
    confidence: float
    asks_question: bool
    property_id: Optional[str] = None
    dom_binding: Optional[object] = None  # entity id or User/Alquist role
    ran_binding: Optional[object] = None
    popularity: float = 0.0
    anchor: Optional[tuple] = None  # (dom, prop, ran) for enrichment bookkeeping

    @property
    def bound_slots(self) -> set[str]:
        slots = set()
        if self.dom_binding is not None:
            slots.add("dom")
        if self.ran_binding is not None:
            slots.add("ran")
        return slots


def _geometric_mean(values: list[float]) -> float:
    if not values:
        return 0.0
    return math.exp(sum(math.log(v) for v in values) / len(values))


def _span_overlap(a: Optional[tuple[int, int]], b: tuple[int, int]) -> bool:
    return a is not None and a[0] < b[1] and b[0] < a[1]


def _bind_span(span: Optional[tuple[int, int]], segment_text: str,
               mentions: list[Mention], choice: dict[tuple[int, int], int]
               ) -> tuple[Optional[object], float]:
    """Resolve a matched span to a role, entity, integer, or literal."""
    if span is None:
        return None, 1.0
    surface = segment_text[span[0]:span[1]].strip().lower()
    if surface in ROLE_SURFACES_BOT:
        return BOT_ROLE, 1.0
    if surface in ROLE_SURFACES_USER:
        return USER_ROLE, 1.0
    for mention in mentions:
        if _span_overlap(span, mention.span) and mention.candidates:
            idx = choice.get(mention.span, 0)
            candidate = mention.candidates[idx]
            return candidate.entity_id, candidate.score
    quantity = parse_quantity(surface)
    if quantity is not None:
        return quantity, 1.0
    return surface, 1.0


def create_actions(segment_ref: tuple[int, int], segment_text: str,
                   annotations: SegmentAnnotations, graph: Graph,
                   registry: PairRegistry,
                   threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
                   weight: float = 1.0) -> list[Action]:
    """Handle actions for one segment from the NLU hypothesis cross product."""
    actions: list[Action] = []
    seen: set[tuple] = set()
    da_hyps = annotations.dialogue_acts or []
    prop_hyps: list = list(annotations.properties) + [None]
    for (da, da_conf), prop_hyp in itertools.product(da_hyps, prop_hyps):
        if prop_hyp is None:
            _try_add(actions, seen, segment_ref, da, [da_conf], None, None, None,
                     graph, registry, threshold, weight)
            continue
        prop = graph.properties.get(prop_hyp.property_id)
        if prop is None:
            continue
        # each mention span may offer several entity candidates
        dom_choices = _candidate_choices(prop_hyp.dom_span, annotations.mentions)
        ran_choices = _candidate_choices(prop_hyp.ran_span, annotations.mentions)
        for dom_idx, ran_idx in itertools.product(dom_choices, ran_choices):
            dom, dom_score = _bind_span(prop_hyp.dom_span, segment_text,
                                        annotations.mentions, dom_idx)
            ran, ran_score = _bind_span(prop_hyp.ran_span, segment_text,
                                        annotations.mentions, ran_idx)
            if not _schema_ok(prop, dom, ran, graph):
                continue
            confs = [da_conf, prop_hyp.confidence]
            if prop_hyp.dom_span is not None and dom_score < 1.0:
                confs.append(dom_score)
            if prop_hyp.ran_span is not None and ran_score < 1.0:
                confs.append(ran_score)
            _try_add(actions, seen, segment_ref, da, confs, prop.id, dom, ran,
                     graph, registry, threshold, weight)
    actions.sort(key=lambda a: (-a.confidence, a.pair_id, str(a.property_id)))
    return actions


def _candidate_choices(span, mentions) -> list[dict]:
    """Index choices over the mention (if any) anchored at a span."""
    for mention in mentions:
        if _span_overlap(span, mention.span):
            return [{mention.span: i} for i in range(len(mention.candidates))]
    return [{}]


def _schema_ok(prop, dom, ran, graph: Graph) -> bool:
    if dom is not None and dom not in (USER_ROLE, BOT_ROLE):
        entity = graph.entities.get(dom)
        if entity is None or (prop.domain_classes
                              and entity.class_id not in prop.domain_classes):
            return False
    if ran is None:
        return True
    if ran in (USER_ROLE, BOT_ROLE):
        return prop.range_class is not None
    if prop.range_kind == "integer":
        return isinstance(ran, int)
    if prop.range_kind == "string":
        return isinstance(ran, str)
    entity = graph.entities.get(ran)
    return entity is not None and entity.class_id == prop.range_class


def _try_add(actions, seen, segment_ref, da, confs, property_id, dom, ran,
             graph, registry, threshold, weight):
    bound = set()
    if dom is not None:
        bound.add("dom")
    if ran is not None:
        bound.add("ran")
    pair = match_pair(registry, da, property_id, bound)
    if pair is None:
        return
    confidence = _geometric_mean(confs) * weight
    if confidence < threshold:
        return
    key = (da.label, property_id, dom, ran, pair.id)
    if key in seen:
        return
    seen.add(key)
    actions.append(Action(
        segment_ref=segment_ref, kind="handle", da=da, pair_id=pair.id,
        confidence=min(confidence, 1.0), asks_question=pair.asks_question,
        property_id=property_id, dom_binding=dom, ran_binding=ran,
    ))


# -- enrichment ----------------------------------------------------------

@dataclass
class Enrichment:
    funfact: Optional[Action] = None
    forward: Optional[Action] = None


def generate_enrichment(mentioned_entities: list[str], graph: Graph,
                        user_id: str, spoken_triples: set[tuple],
                        asked_forwards: set[str],
                        handle_asks_question: bool,
                        funfact_pair: str = "funfact",
                        forward_pair: str = "forward") -> Enrichment:
    """Highest-popularity fun-fact and forward candidates for this turn.

    Candidate popularity is the arithmetic mean of the popularities of the
    contained entities and property. The forward slot stays empty when a
    selected handle action already asks a question.
    """
    mentioned = [e for e in dict.fromkeys(mentioned_entities) if e in graph.entities]
    out = Enrichment()

    funfacts = []
    for triple in graph.iter_triples():
        if triple.source != "builtin":
            continue
        prop = graph.properties[triple.property_id]
        if "FunFact_Statement" not in prop.sentence_structures:
            continue
        key = (triple.domain_id, triple.property_id, triple.range_value)
        if key in spoken_triples:
            continue
        touched = {triple.domain_id}
        if prop.range_class is not None:
            touched.add(triple.range_value)
        if not touched & set(mentioned):
            continue
        pops = [graph.entities[e].popularity for e in sorted(touched)]
        pops.append(prop.popularity)
        funfacts.append((sum(pops) / len(pops), triple))
    if funfacts:
        funfacts.sort(key=lambda p: (-p[0], p[1].domain_id, p[1].property_id))
        popularity, triple = funfacts[0]
        out.funfact = Action(
            segment_ref=(-1, -1), kind="funfact",
            da=DialogueAct("Inf", "Obj"), pair_id=funfact_pair,
            confidence=1.0, asks_question=False,
            property_id=triple.property_id, dom_binding=triple.domain_id,
            ran_binding=triple.range_value, popularity=popularity,
            anchor=(triple.domain_id, triple.property_id, triple.range_value),
        )

    if handle_asks_question:
        return out
    forwards = []
    for entity_id in mentioned:
        entity = graph.entities[entity_id]
        for prop in graph.properties.values():
            if not prop.personalized:
                continue
            if "Forward_Question" not in prop.sentence_structures:
                continue
            if prop.range_class != entity.class_id:
                continue
            if prop.id in asked_forwards:
                continue  # never re-ask the same forward question
            user_entity = graph.user_entity_id(user_id)
            if graph.query(user_entity, prop.id, user_id=user_id):
                continue  # user already told us
            popularity = (entity.popularity + prop.popularity) / 2
            forwards.append((popularity, entity_id, prop.id))
    if forwards:
        forwards.sort(key=lambda t: (-t[0], t[1], t[2]))
        popularity, entity_id, prop_id = forwards[0]
        out.forward = Action(
            segment_ref=(-1, -1), kind="forward",
            da=DialogueAct("Que", "WhOb"), pair_id=forward_pair,
            confidence=1.0, asks_question=True,
            property_id=prop_id, dom_binding=USER_ROLE, ran_binding=None,
            popularity=popularity,
        )
        out.forward = replace(out.forward, anchor=(entity_id, prop_id, None))
    return out


# -- selection -----------------------------------------------------------

def _selection_valid(selection: list[Action]) -> bool:
    pair_ids = [a.pair_id for a in selection]
    if len(set(pair_ids)) != len(pair_ids):
        return False
    return sum(1 for a in selection if a.asks_question) <= 1


def select_actions(groups: list[list[Action]]) -> list[Action]:
    """One action per non-empty segment group, maximizing total confidence.

    Exhaustive search within the combination bound, greedy above it.
    Infeasible instances degrade: the first blocked segment keeps its best
    action rerouted to the generic acknowledge pair, later blocked
    segments are dropped.
    """
    groups = [g for g in groups if g]
    if not groups:
        return []
    total_combinations = math.prod(len(g) for g in groups)
    if total_combinations <= EXHAUSTIVE_BOUND:
        best = None
        best_key = None
        for combo in itertools.product(*groups):
            if not _selection_valid(list(combo)):
                continue
            score = sum(a.confidence for a in combo)
            tie = tuple((-a.popularity, a.pair_id) for a in combo)
            key = (-score, tie)
            if best_key is None or key < best_key:
                best, best_key = list(combo), key
        if best is not None:
            return best
        return _greedy_fallback(groups)
    return _greedy_select(groups)


def _greedy_select(groups: list[list[Action]]) -> list[Action]:
    selection: list[Action] = []
    used_pairs: set[str] = set()
    question_taken = False
    order = sorted(range(len(groups)),
                   key=lambda i: -max(a.confidence for a in groups[i]))
    chosen: dict[int, Action] = {}
    for i in order:
        ranked = sorted(groups[i], key=lambda a: (-a.confidence, -a.popularity, a.pair_id))
        placed = False
        for action in ranked:
            if action.pair_id in used_pairs:
                continue
            if action.asks_question and question_taken:
                continue
            chosen[i] = action
            used_pairs.add(action.pair_id)
            question_taken = question_taken or action.asks_question
            placed = True
            break
        if not placed:
            chosen[i] = _fallback_action(ranked[0]) if FALLBACK_PAIR_ID not in used_pairs else None
            if chosen[i] is not None:
                used_pairs.add(FALLBACK_PAIR_ID)
    for i in range(len(groups)):
        action = chosen.get(i)
        if action is not None:
            selection.append(action)
    return selection


def _greedy_fallback(groups: list[list[Action]]) -> list[Action]:
    log.warning("no feasible selection; applying acknowledge fallback")
    return _greedy_select(groups)


def _fallback_action(action: Action) -> Action:
    return replace(action, pair_id=FALLBACK_PAIR_ID, asks_question=False,
                   property_id=None, dom_binding=None, ran_binding=None)
