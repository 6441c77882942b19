"""Knowledge-graph-grounded dialogue engine."""

from .acts import DialogueAct, INVALID_OTHER, TAXONOMY, all_leaves
from .kg import (
    BOT_ROLE,
    Candidate,
    CheckResult,
    Entity,
    Graph,
    GraphError,
    PropertyDef,
    Triple,
    USER_ROLE,
)
from .manager import DialogueManager, SessionState
from .nlu.segmentation import Hypothesis, Segment
from .pipeline import Engine, TurnRequest, TurnResponse

__all__ = [
    "BOT_ROLE",
    "Candidate",
    "CheckResult",
    "DialogueAct",
    "DialogueManager",
    "Engine",
    "Entity",
    "Graph",
    "GraphError",
    "Hypothesis",
    "INVALID_OTHER",
    "PropertyDef",
    "Segment",
    "SessionState",
    "TAXONOMY",
    "Triple",
    "TurnRequest",
    "TurnResponse",
    "USER_ROLE",
    "all_leaves",
]

__version__ = "1.0.0"
