"""Turn pipeline: NLU, action creation and selection, dialogue management, NLG.

The engine owns one knowledge graph and one dialogue manager and serves
any number of conversations. A turn takes ranked ASR hypotheses, responds
to exactly one of them (the one whose selected actions score highest),
appends at most one fun-fact and one forward question, and persists
learned facts plus the session snapshot before returning.
"""

from __future__ import annotations

import logging
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .actions import (
    Action,
    DEFAULT_CONFIDENCE_THRESHOLD,
    FALLBACK_PAIR_ID,
    create_actions,
    generate_enrichment,
    select_actions,
)
from .acts import INVALID_OTHER
from .kg import Graph
from .lexicalizer import (
    LexicalizationError,
    Lexicons,
    RealizationContext,
    realize_with_mentions,
)
from .manager import DialogueManager, Emission, SessionState
from .nlu.segmentation import Hypothesis, RuleTables
from .nlu.suite import NluSuite
from .pairs import load_pairs
from .templates import (
    MissingSlotError,
    PatternIndex,
    StructureRegistry,
    generate_da_patterns,
    load_da_lexicon,
    realize_structure,
)

log = logging.getLogger(__name__)

DEFAULT_DATA_DIR = Path(__file__).parent / "data"
DEFAULT_BOT_ENTITY = "alquist"
ANSWER_BOOST = 1.2  # applied to answer acts while a bot question is pending
FALLBACK_SENTENCE = "I see!"
APOLOGY_SENTENCE = "I'm sorry but I don't know that..."


@dataclass(frozen=True)
class TurnRequest:
    hypotheses: tuple[Hypothesis, ...]

    def __post_init__(self):
        if not self.hypotheses:
            raise ValueError("a turn needs at least one hypothesis")
        confs = [h.asr_confidence for h in self.hypotheses]
        if confs != sorted(confs, reverse=True):
            raise ValueError("hypotheses must be sorted by descending confidence")


@dataclass
class TurnResponse:
    text: str
    debug: dict = field(default_factory=dict)


class Engine:
    """Everything needed to run conversations over one data directory."""

    def __init__(self, data_dir: Optional[Path] = None,
                 store_dir: Optional[Path] = None,
                 bot_entity_id: str = DEFAULT_BOT_ENTITY,
                 k: int = 3,
                 threshold: float = DEFAULT_CONFIDENCE_THRESHOLD):
        self.data_dir = Path(data_dir) if data_dir else DEFAULT_DATA_DIR
        self.store_dir = Path(store_dir) if store_dir else None
        self.threshold = threshold
        self.graph = Graph.load(self.data_dir, store_dir=self.store_dir)
        self.structures = StructureRegistry.load(self.data_dir / "structures.json")
        self.pattern_report: list = []
        patterns = generate_da_patterns(self.graph, self.structures, self.pattern_report)
        lexicon_path = self.data_dir / "da_lexicon.txt"
        lexicon = load_da_lexicon(lexicon_path) if lexicon_path.exists() else []
        self.index = PatternIndex(patterns, lexicon)
        self.rules = RuleTables.load(self.data_dir)
        self.suite = NluSuite(self.graph, self.index, self.rules, k=k)
        self.pairs, self.pair_report = load_pairs(self.data_dir / "pairs.json",
                                                  self.structures)
        for violation in self.pair_report:
            log.warning("pair excluded: %s", violation)
        self.lexicons = Lexicons.load(self.data_dir)
        self.bot_entity_id = bot_entity_id
        self.manager = DialogueManager(self.graph, self.pairs, bot_entity_id)
        self._conversations: dict[str, SessionState] = {}
        self._loaded_users: set[str] = set()

    # -- conversation lifecycle ------------------------------------------

    @property
    def sessions_dir(self) -> Optional[Path]:
        return self.store_dir / "sessions" if self.store_dir else None

    def _load_user(self, user_id: str):
        if user_id in self._loaded_users:
            return
        self.graph.load_user(user_id)
        self.graph.user_entity_id(user_id)
        self._loaded_users.add(user_id)

    def create_conversation(self, user_id: str) -> str:
        if not user_id or not user_id.strip():
            raise ValueError("user_id must be non-empty")
        self._load_user(user_id)
        conversation_id = uuid.uuid4().hex[:12]
        state = SessionState(conversation_id=conversation_id, user_id=user_id)
        self._conversations[conversation_id] = state
        if self.sessions_dir:
            state.save(self.sessions_dir)
        return conversation_id

    def get_conversation(self, conversation_id: str) -> Optional[SessionState]:
        state = self._conversations.get(conversation_id)
        if state is None and self.sessions_dir:
            state = SessionState.load(self.sessions_dir, conversation_id)
            if state is not None:
                self._load_user(state.user_id)
                self._conversations[conversation_id] = state
        return state

    def user_profile(self, user_id: str) -> dict:
        self._load_user(user_id)
        facts = []
        for triple in self.graph.learned_triples(user_id):
            value = triple.range_value
            if isinstance(value, str) and value in self.graph.entities:
                value = self.graph.entities[value].canonical_name
            facts.append({"property": triple.property_id, "value": value,
                          "tense": triple.tense})
        return {"user_id": user_id, "facts": facts}

    # -- the turn --------------------------------------------------------

    def handle_turn(self, conversation_id: str, request: TurnRequest) -> TurnResponse:
        state = self.get_conversation(conversation_id)
        if state is None:
            raise KeyError(f"unknown conversation {conversation_id!r}")
        timings: dict[str, float] = {}
        debug: dict = {"timings": timings}
        started = time.perf_counter()
        try:
            response = self._run_turn(state, request, debug, timings)
        except Exception:
            log.exception("turn failed; degrading to acknowledgement")
            response = TurnResponse(f"{FALLBACK_SENTENCE} {APOLOGY_SENTENCE}", debug)
            state.turn_counter += 1
        timings["total_ms"] = round((time.perf_counter() - started) * 1000, 3)
        self._persist(state)
        return response

    def _run_turn(self, state: SessionState, request: TurnRequest,
                  debug: dict, timings: dict) -> TurnResponse:
        graph = self.graph
        self.suite.reset_counts()

        t0 = time.perf_counter()
        annotated = self.suite.annotate_batch(list(request.hypotheses))
        timings["nlu_ms"] = round((time.perf_counter() - t0) * 1000, 3)
        if state.pending_question:
            for _seg, ann in annotated:
                ann.dialogue_acts = _boost_answers(ann.dialogue_acts)
        debug["segments"] = [{
            "hypothesis": seg.hypothesis_index,
            "index": seg.segment_index,
            "text": seg.text,
            "terminal": seg.terminal_punct,
            "dialogue_acts": [(da.label, conf) for da, conf in ann.dialogue_acts],
            "mentions": [{"text": m.text,
                          "candidates": [(c.entity_id, c.score) for c in m.candidates]}
                         for m in ann.mentions],
            "properties": [(p.property_id, p.confidence) for p in ann.properties],
            "tense": ann.tense,
        } for seg, ann in annotated]
        debug["analyzer_calls"] = self.suite.invocation_counts()

        # candidate actions per segment, grouped by hypothesis
        t0 = time.perf_counter()
        by_hypothesis: dict[int, list[list[Action]]] = {}
        tense_by_ref: dict[tuple[int, int], str] = {}
        ann_by_ref: dict[tuple[int, int], object] = {}
        for seg, ann in annotated:
            ref = (seg.hypothesis_index, seg.segment_index)
            tense_by_ref[ref] = ann.tense
            ann_by_ref[ref] = ann
            weight = request.hypotheses[seg.hypothesis_index].asr_confidence
            actions = create_actions(ref, seg.text, ann, graph, self.pairs,
                                     threshold=self.threshold, weight=weight)
            if not actions:
                actions = [Action(segment_ref=ref, kind="handle", da=INVALID_OTHER,
                                  pair_id=FALLBACK_PAIR_ID, confidence=self.threshold,
                                  asks_question=False)]
            by_hypothesis.setdefault(seg.hypothesis_index, []).append(actions)
        debug["actions"] = {
            h: [[_action_view(a) for a in group] for group in groups]
            for h, groups in by_hypothesis.items()
        }

        # respond to the single hypothesis whose selection scores best
        best_idx, selected = 0, []
        best_score = float("-inf")
        for h_idx in sorted(by_hypothesis):
            chosen = select_actions(by_hypothesis[h_idx])
            score = sum(a.confidence for a in chosen)
            if score > best_score:
                best_idx, selected, best_score = h_idx, chosen, score
        timings["selection_ms"] = round((time.perf_counter() - t0) * 1000, 3)
        debug["chosen_hypothesis"] = best_idx
        debug["selected"] = [_action_view(a) for a in selected]

        # dialogue management + surface realization
        t0 = time.perf_counter()
        emissions = self.manager.step(state, selected, tense_by_ref)
        sentences: list[str] = []
        spoken_entities: list[str] = []
        for emission in emissions:
            self._realize(emission, state, sentences, spoken_entities)

        # enrichment: one fun fact, one forward question
        user_mentions = []
        for seg, ann in annotated:
            if seg.hypothesis_index != best_idx:
                continue
            user_mentions.extend(m.candidates[0].entity_id for m in ann.mentions
                                 if m.candidates)
        handle_asks = any(a.asks_question for a in selected) \
            or any(s.endswith("?") for s in sentences)
        enrichment = generate_enrichment(
            user_mentions, graph, state.user_id, state.spoken_triples,
            state.asked_forwards, handle_asks)
        enrichment_view = {}
        if enrichment.funfact is not None:
            for emission in self.manager.push_enrichment(state, enrichment.funfact):
                self._realize(emission, state, sentences, spoken_entities)
            state.spoken_triples.add(enrichment.funfact.anchor)
            enrichment_view["funfact"] = _action_view(enrichment.funfact)
            if enrichment.funfact.asks_question:
                enrichment = type(enrichment)(funfact=enrichment.funfact, forward=None)
        if enrichment.forward is not None:
            for emission in self.manager.push_enrichment(state, enrichment.forward):
                self._realize(emission, state, sentences, spoken_entities)
            state.asked_forwards.add(enrichment.forward.property_id)
            enrichment_view["forward"] = _action_view(enrichment.forward)
        debug["enrichment"] = enrichment_view
        timings["response_ms"] = round((time.perf_counter() - t0) * 1000, 3)

        if not sentences:
            sentences.append(FALLBACK_SENTENCE)
        text = " ".join(sentences)

        used_properties = [a.property_id for a in selected if a.property_id]
        for action in (enrichment.funfact, enrichment.forward):
            if action is not None and action.property_id:
                used_properties.append(action.property_id)
        asked = text.rstrip().endswith("?") or any(s.endswith("?") for s in sentences)
        self.manager.update_memory(state, user_mentions + spoken_entities,
                                   used_properties, asked)
        debug["pair_stack"] = [inst.to_json() for inst in state.stack]
        state.transcript.append({
            "user": request.hypotheses[best_idx].text,
            "bot": text,
        })
        return TurnResponse(text=text, debug=debug)

    def _realize(self, emission: Emission, state: SessionState,
                 sentences: list[str], spoken_entities: list[str]):
        bindings = emission.bindings
        try:
            structure = self.structures[emission.structure]
            prop = self.graph.properties.get(bindings.get("property"))
            pattern = realize_structure(structure, prop)
            context = RealizationContext(
                user_entity=self.graph.user_entity_id(state.user_id),
                bot_entity=self.bot_entity_id,
                tense=bindings.get("tense", "present"),
                already_mentioned=frozenset(spoken_entities),
                lexicons=self.lexicons,
            )
            text, mentioned = realize_with_mentions(pattern, bindings, context,
                                                    self.graph)
        except (KeyError, MissingSlotError, LexicalizationError, ValueError):
            log.exception("failed to realize %s/%s", emission.pair_id,
                          emission.structure)
            if APOLOGY_SENTENCE not in sentences:
                sentences.append(APOLOGY_SENTENCE)
            return
        sentences.append(text)
        spoken_entities.extend(mentioned)

    def _persist(self, state: SessionState):
        if self.store_dir is None:
            return
        try:
            self.graph.persist(state.user_id)
            state.save(self.sessions_dir)
        except OSError:
            log.exception("failed to persist session %s", state.conversation_id)

    # -- validation ------------------------------------------------------

    def validation_report(self) -> list[str]:
        problems = [str(v) for v in self.pair_report]
        problems.extend(
            f"pattern skipped: {prop}/{structure}: {reason}"
            for prop, structure, reason in self.pattern_report
            if "unknown structure" in reason or "unresolved" in reason)
        return problems


def _boost_answers(ranked):
    boosted = [(da, min(1.0, round(conf * ANSWER_BOOST, 6)) if da.t2 == "Ans" else conf)
               for da, conf in ranked]
    boosted.sort(key=lambda p: (-p[1], p[0].label))
    return boosted


def _action_view(action: Action) -> dict:
    return {
        "segment": list(action.segment_ref),
        "kind": action.kind,
        "da": action.da.label,
        "pair": action.pair_id,
        "confidence": round(action.confidence, 4),
        "asks_question": action.asks_question,
        "property": action.property_id,
        "dom": action.dom_binding,
        "ran": action.ran_binding,
    }
