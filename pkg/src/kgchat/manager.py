"""Dialogue management: pair stack, plan execution, session memory.

A session keeps a bounded stack of open adjacency-pair instances. Each
selected action either continues the topmost instance (when one of its
user edges matches the action's dialogue act) or pushes a fresh instance.
Executing an instance walks its current node's steps in order — structure
references become emissions, the node's knowledge-graph operation decides
which branch to chain into within the same turn — until a node without a
resolvable branch is reached. Terminal nodes pop the instance.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .actions import Action
from .kg import BOT_ROLE, USER_ROLE, Graph, GraphError, Triple
from .pairs import KgOp, PairRegistry

log = logging.getLogger(__name__)

MAX_STACK_DEPTH = 4
MAX_RECENT_ENTITIES = 10
APOLOGY_STRUCTURE = "Apology_Unknown"
_MAX_CHAIN = 12  # branch chains are tiny; this only guards miswired cycles


@dataclass
class PairInstance:
    pair_id: str
    node_id: str
    bindings: dict = field(default_factory=dict)
    opened_at_turn: int = 0

    def to_json(self) -> dict:
        return {"pair": self.pair_id, "node": self.node_id,
                "bindings": dict(self.bindings), "opened_at_turn": self.opened_at_turn}

    @classmethod
    def from_json(cls, rec: dict) -> "PairInstance":
        return cls(rec["pair"], rec["node"], dict(rec.get("bindings", {})),
                   int(rec.get("opened_at_turn", 0)))


@dataclass
class SessionState:
    conversation_id: str
    user_id: str
    turn_counter: int = 0
    stack: list[PairInstance] = field(default_factory=list)
    recent_entities: list[tuple[str, int]] = field(default_factory=list)
    pending_question: bool = False
    asked_forwards: set[str] = field(default_factory=set)  # property ids
    spoken_triples: set[tuple] = field(default_factory=set)
    transcript: list[dict] = field(default_factory=list)

    def note_entity(self, entity_id: str):
        self.recent_entities = [(e, t) for e, t in self.recent_entities if e != entity_id]
        self.recent_entities.append((entity_id, self.turn_counter))
        if len(self.recent_entities) > MAX_RECENT_ENTITIES:
            del self.recent_entities[0]

    def to_json(self) -> dict:
        return {
            "conversation_id": self.conversation_id,
            "user_id": self.user_id,
            "turn_counter": self.turn_counter,
            "stack": [inst.to_json() for inst in self.stack],
            "recent_entities": [[e, t] for e, t in self.recent_entities],
            "pending_question": self.pending_question,
            "asked_forwards": sorted(self.asked_forwards),
            "spoken_triples": sorted((list(t) for t in self.spoken_triples), key=repr),
            "transcript": list(self.transcript),
        }

    @classmethod
    def from_json(cls, rec: dict) -> "SessionState":
        return cls(
            conversation_id=rec["conversation_id"],
            user_id=rec["user_id"],
            turn_counter=int(rec.get("turn_counter", 0)),
            stack=[PairInstance.from_json(r) for r in rec.get("stack", [])],
            recent_entities=[(e, t) for e, t in rec.get("recent_entities", [])],
            pending_question=bool(rec.get("pending_question", False)),
            asked_forwards=set(rec.get("asked_forwards", [])),
            spoken_triples={tuple(t) for t in rec.get("spoken_triples", [])},
            transcript=list(rec.get("transcript", [])),
        )

    def save(self, sessions_dir: Path):
        sessions_dir = Path(sessions_dir)
        sessions_dir.mkdir(parents=True, exist_ok=True)
        path = sessions_dir / f"{self.conversation_id}.json"
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)
        tmp.replace(path)

    @classmethod
    def load(cls, sessions_dir: Path, conversation_id: str) -> Optional["SessionState"]:
        path = Path(sessions_dir) / f"{conversation_id}.json"
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Emission:
    """One sentence structure to realize, with its binding snapshot."""

    pair_id: str
    structure: str
    bindings: dict


class DialogueManager:
    def __init__(self, graph: Graph, pairs: PairRegistry, bot_entity_id: str):
        self.graph = graph
        self.pairs = pairs
        self.bot_entity_id = bot_entity_id

    # -- stack stepping --------------------------------------------------

    def step(self, state: SessionState, actions: list[Action],
             tense_by_ref: Optional[dict] = None) -> list[Emission]:
        emissions: list[Emission] = []
        for action in actions:
            tense = (tense_by_ref or {}).get(action.segment_ref, "present")
            emissions.extend(self._apply(state, action, tense))
        return emissions

    def push_enrichment(self, state: SessionState, action: Action) -> list[Emission]:
        """Fun-fact / forward instances are engine-pushed, never triggered."""
        return self._push_and_run(state, action, tense="present")

    def _apply(self, state: SessionState, action: Action, tense: str) -> list[Emission]:
        if state.stack:
            active = state.stack[-1]
            pair = self.pairs[active.pair_id]
            to_node = pair.follow(active.node_id, action.da)
            if to_node is not None:
                self._merge_bindings(active, action, tense)
                active.node_id = to_node
                return self._execute(state, active)
        return self._push_and_run(state, action, tense)

    def _push_and_run(self, state: SessionState, action: Action, tense: str) -> list[Emission]:
        if action.pair_id not in self.pairs:
            log.warning("action references unknown pair %r; skipped", action.pair_id)
            return []
        pair = self.pairs[action.pair_id]
        instance = PairInstance(
            pair_id=pair.id,
            node_id=pair.entry,
            bindings={k: v for k, v in (
                ("dom", action.dom_binding),
                ("ran", action.ran_binding),
                ("property", action.property_id),
                ("tense", tense),
            ) if v is not None},
            opened_at_turn=state.turn_counter,
        )
        # one open instance per pair: re-triggering replaces the older one
        state.stack = [i for i in state.stack if i.pair_id != pair.id]
        state.stack.append(instance)
        if len(state.stack) > MAX_STACK_DEPTH:
            evicted = state.stack.pop(0)
            log.info("pair stack full; evicted %s", evicted.pair_id)
        return self._execute(state, instance)

    @staticmethod
    def _merge_bindings(instance: PairInstance, action: Action, tense: str):
        for key, value in (("dom", action.dom_binding),
                           ("ran", action.ran_binding),
                           ("property", action.property_id)):
            if value is not None:
                instance.bindings[key] = value
        instance.bindings["tense"] = tense

    # -- plan execution --------------------------------------------------

    def _execute(self, state: SessionState, instance: PairInstance) -> list[Emission]:
        pair = self.pairs[instance.pair_id]
        emissions: list[Emission] = []
        for _ in range(_MAX_CHAIN):
            node = pair.nodes[instance.node_id]
            status = None
            failed = False
            for step in node.steps:
                if isinstance(step, KgOp):
                    try:
                        status = self._run_op(state, instance, step)
                    except (GraphError, KeyError, ValueError, TypeError):
                        log.exception("kg-op failed in %s/%s", pair.id, node.node_id)
                        failed = True
                else:
                    emissions.append(Emission(pair.id, step, dict(instance.bindings)))
            if failed:
                if "unknown" in node.branch:
                    status = "unknown"
                else:
                    emissions.append(Emission(pair.id, APOLOGY_STRUCTURE,
                                              dict(instance.bindings)))
                    break
            if not node.branch or status is None:
                break
            next_node = self._resolve_branch(node.branch, status)
            if next_node is None:
                break
            instance.node_id = next_node
        else:
            log.error("branch chain did not settle in pair %s; stopping", pair.id)
        if instance.node_id in pair.terminals and instance in state.stack:
            state.stack.remove(instance)
        return emissions

    @staticmethod
    def _resolve_branch(branch: dict[str, str], status: str) -> Optional[str]:
        if status in branch:
            return branch[status]
        if status == "zero" and "known" in branch:
            return branch["known"]  # pairs without a zero path treat 0 as a value
        return None

    def _resolve_role(self, state: SessionState, value):
        if value == USER_ROLE:
            return self.graph.user_entity_id(state.user_id)
        if value == BOT_ROLE:
            return self.bot_entity_id
        return value

    def _run_op(self, state: SessionState, instance: PairInstance, op: KgOp) -> str:
        bindings = instance.bindings
        if op.dom == "user":
            bindings["dom"] = USER_ROLE
        elif op.dom == "bot":
            bindings["dom"] = BOT_ROLE
        prop_id = bindings.get("property")
        dom_id = self._resolve_role(state, bindings.get("dom"))
        if prop_id is None or dom_id is None:
            if op.op == "assert":
                return "stored_new"  # nothing learnable; acknowledge
            raise GraphError(f"underspecified {op.op}: property={prop_id!r} dom={dom_id!r}")

        if op.op == "query":
            triples = self.graph.query(dom_id, prop_id, user_id=state.user_id)
            if not triples:
                return "unknown"
            value = triples[-1].range_value
            bindings["ran"] = value
            if isinstance(value, int) and not isinstance(value, bool) and value == 0:
                return "zero"
            return "known"

        if op.op == "check":
            claimed = self._resolve_role(state, bindings.get("ran"))
            if claimed is None:
                raise GraphError("check without a claimed value")
            result = self.graph.check_fact(dom_id, prop_id, claimed,
                                           user_id=state.user_id)
            if result.status == "contradicted":
                bindings["ran"] = result.actual
            return result.status

        if op.op == "assert":
            ran = self._resolve_role(state, bindings.get("ran"))
            if ran is None:
                return "stored_new"
            triple = Triple(
                domain_id=dom_id, property_id=prop_id, range_value=ran,
                tense=bindings.get("tense", "present"),
                source=f"learned:{state.user_id}",
            )
            return self.graph.assert_fact(triple).status

        raise GraphError(f"unknown kg-op {op.op!r}")

    # -- memory ----------------------------------------------------------

    def update_memory(self, state: SessionState, mentioned_entities: list[str],
                      used_property_ids: list[str], asked_question: bool):
        """Popularity bumps, recency, and the open-question flag for next turn."""
        bumps = []
        for entity_id in mentioned_entities:
            if entity_id in self.graph.entities:
                bumps.append(entity_id)
                state.note_entity(entity_id)
        bumps.extend(p for p in used_property_ids if p in self.graph.properties)
        if bumps:
            self.graph.bump_popularity(bumps)
        state.pending_question = asked_question
        state.turn_counter += 1
