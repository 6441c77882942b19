"""Adjacency-pair definitions: small node/edge response graphs.

A pair is triggered by a dialogue act (optionally constrained to one
property and a required slot set), walks branch outcomes of at most one
knowledge-graph operation per node, and waits on user edges between
turns. Internal pairs (fun-fact, forward) are pushed by the engine
rather than trigger-matched.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .acts import DialogueAct
from .templates import StructureRegistry

log = logging.getLogger(__name__)

KG_OPS = ("query", "check", "assert")
_BRANCH_KEYS = {
    "query": {"known", "zero", "unknown"},
    "check": {"confirmed", "contradicted", "unknown"},
    "assert": {"stored_new", "superseded"},
}


@dataclass(frozen=True)
class KgOp:
    op: str  # query | check | assert
    dom: Optional[str] = None  # optional rebinding: "user" | "bot"


@dataclass
class ResponsePlan:
    """One node's response: structure refs plus at most one kg-op."""

    node_id: str
    steps: list  # str (structure name) or KgOp, in order
    branch: dict[str, str] = field(default_factory=dict)

    @property
    def kg_op(self) -> Optional[KgOp]:
        ops = [s for s in self.steps if isinstance(s, KgOp)]
        return ops[0] if ops else None

    @property
    def structures(self) -> list[str]:
        return [s for s in self.steps if isinstance(s, str)]


@dataclass(frozen=True)
class Trigger:
    da_prefix: Optional[str]  # None: never auto-triggered
    property_id: Optional[str] = None
    slots: frozenset = frozenset()

    def matches(self, da: DialogueAct, property_id: Optional[str],
                bound_slots: set[str]) -> bool:
        if self.da_prefix is None:
            return False
        if not da.matches_prefix(self.da_prefix):
            return False
        if self.property_id is not None and self.property_id != property_id:
            return False
        return self.slots <= bound_slots

    @property
    def specificity(self) -> tuple:
        depth = self.da_prefix.count(".") if self.da_prefix else 0
        return (self.property_id is not None, depth, len(self.slots))


@dataclass
class AdjacencyPair:
    id: str
    trigger: Trigger
    nodes: dict[str, ResponsePlan]
    edges: list[tuple[str, str, str]]  # (from, da prefix, to)
    entry: str
    terminals: set[str]
    internal: bool = False
    asks_question: bool = False  # derived at load

    def edges_from(self, node_id: str) -> list[tuple[str, str, str]]:
        return [e for e in self.edges if e[0] == node_id]

    def follow(self, node_id: str, da: DialogueAct) -> Optional[str]:
        for _frm, prefix, to in self.edges_from(node_id):
            if da.matches_prefix(prefix):
                return to
        return None


@dataclass
class Violation:
    pair_id: str
    node: Optional[str]
    message: str

    def __str__(self):
        where = f"{self.pair_id}" + (f"/{self.node}" if self.node else "")
        return f"{where}: {self.message}"


class PairRegistry:
    def __init__(self, pairs: list[AdjacencyPair]):
        self.by_id = {p.id: p for p in pairs}

    def __getitem__(self, pair_id) -> AdjacencyPair:
        return self.by_id[pair_id]

    def __contains__(self, pair_id):
        return pair_id in self.by_id

    def __iter__(self):
        return iter(self.by_id.values())


def _parse_steps(raw_steps) -> list:
    steps = []
    for step in raw_steps:
        if isinstance(step, str):
            steps.append(step)
        else:
            steps.append(KgOp(op=step["op"], dom=step.get("dom")))
    return steps


def load_pairs(path: Path, structures: Optional[StructureRegistry] = None
               ) -> tuple[PairRegistry, list[Violation]]:
    """Parse and validate the pair file; invalid pairs are excluded."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    pairs = []
    for rec in raw["pairs"]:
        trig = rec.get("trigger") or {}
        pair = AdjacencyPair(
            id=rec["id"],
            trigger=Trigger(
                da_prefix=trig.get("da"),
                property_id=trig.get("property"),
                slots=frozenset(trig.get("slots", ())),
            ),
            nodes={nid: ResponsePlan(nid, _parse_steps(node.get("steps", ())),
                                     dict(node.get("branch", {})))
                   for nid, node in rec["nodes"].items()},
            edges=[(e["from"], e["da"], e["to"]) for e in rec.get("edges", ())],
            entry=rec["entry"],
            terminals=set(rec.get("terminals", ())),
            internal=bool(rec.get("internal", False)),
        )
        pairs.append(pair)
    report = validate_pairs(pairs, structures)
    bad = {v.pair_id for v in report}
    kept = [p for p in pairs if p.id not in bad]
    for pair in kept:
        pair.asks_question = _derive_asks_question(pair, structures)
    return PairRegistry(kept), report


def _entry_closure(pair: AdjacencyPair) -> set[str]:
    """Nodes reachable from entry through branch outcomes only (same turn)."""
    seen, todo = set(), [pair.entry]
    while todo:
        node_id = todo.pop()
        if node_id in seen or node_id not in pair.nodes:
            continue
        seen.add(node_id)
        todo.extend(pair.nodes[node_id].branch.values())
    return seen

def _derive_asks_question(pair: AdjacencyPair, structures: Optional[StructureRegistry]) -> bool:
    if structures is None:
        return False
    for node_id in _entry_closure(pair):
        for name in pair.nodes[node_id].structures:
            if name in structures and structures[name].asks_question:
                return True
    return False


def validate_pairs(pairs: list[AdjacencyPair],
                   structures: Optional[StructureRegistry] = None) -> list[Violation]:
    report: list[Violation] = []
    for pair in pairs:
        report.extend(_validate_pair(pair, structures))
    return report


def _validate_pair(pair: AdjacencyPair, structures) -> list[Violation]:
    out = []
    if pair.entry not in pair.nodes:
        out.append(Violation(pair.id, None, f"entry node {pair.entry!r} missing"))
        return out
    # connectivity over edges plus branch targets
    seen, todo = set(), [pair.entry]
    while todo:
        node_id = todo.pop()
        if node_id in seen:
            continue
        seen.add(node_id)
        if node_id not in pair.nodes:
            out.append(Violation(pair.id, node_id, "reference to undefined node"))
            continue
        todo.extend(to for _f, _da, to in pair.edges_from(node_id))
        todo.extend(pair.nodes[node_id].branch.values())
    for node_id in pair.nodes:
        if node_id not in seen:
            out.append(Violation(pair.id, node_id, "unreachable node"))
    for node_id, plan in pair.nodes.items():
        ops = [s for s in plan.steps if isinstance(s, KgOp)]
        if len(ops) > 1:
            out.append(Violation(pair.id, node_id, "more than one kg-op"))
        if ops:
            op = ops[0]
            if op.op not in KG_OPS:
                out.append(Violation(pair.id, node_id, f"unknown kg-op {op.op!r}"))
            else:
                extra = set(plan.branch) - _BRANCH_KEYS[op.op]
                if extra:
                    out.append(Violation(pair.id, node_id,
                                         f"branch keys {sorted(extra)} invalid for {op.op}"))
        elif plan.branch:
            out.append(Violation(pair.id, node_id, "branch without a kg-op"))
        if structures is not None:
            for name in plan.structures:
                if name not in structures:
                    out.append(Violation(pair.id, node_id,
                                         f"unknown structure type {name!r}"))
        outgoing = pair.edges_from(node_id)
        if node_id not in pair.terminals and not outgoing and not plan.branch:
            out.append(Violation(pair.id, node_id, "non-terminal node with no outgoing edge"))
        prefixes = [da for _f, da, _t in outgoing]
        for i, a in enumerate(prefixes):
            for b in prefixes[i + 1:]:
                if a == b or a.startswith(b + ".") or b.startswith(a + "."):
                    out.append(Violation(pair.id, node_id,
                                         f"overlapping edge DA prefixes {a!r} / {b!r}"))
    for frm, _da, to in pair.edges:
        if frm not in pair.nodes or to not in pair.nodes:
            out.append(Violation(pair.id, None, f"edge references undefined node {frm}->{to}"))
    return out


def match_pair(registry: PairRegistry, da: DialogueAct,
               property_id: Optional[str], bound_slots: set[str]
               ) -> Optional[AdjacencyPair]:
    """Most-specific trigger match; lexicographic pair-id tie-break."""
    candidates = [p for p in registry
                  if not p.internal and p.trigger.matches(da, property_id, bound_slots)]
    if not candidates:
        return None
    candidates.sort(key=lambda p: (p.trigger.specificity, p.id), reverse=True)
    best = candidates[0]
    ties = [p for p in candidates if p.trigger.specificity == best.trigger.specificity]
    if len(ties) > 1:
        ties.sort(key=lambda p: p.id)
        best = ties[0]
        log.debug("ambiguous pair triggers %s; picked %s", [p.id for p in ties], best.id)
    return best
