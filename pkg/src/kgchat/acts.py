"""Hierarchical dialogue-act taxonomy.

Acts form a three-tier hierarchy rooted at ``da``. The second tier groups
communicative functions (question, answer, inform, ...) and the third tier
holds the concrete leaf tags. Class strings are the root-to-leaf path,
e.g. ``da.Que.Yesno``.
"""

from __future__ import annotations

from dataclasses import dataclass

# t2 -> allowed t3 leaves. ``Act`` carries no leaves: it covers non-verbal
# actions that never surface as classifiable text in this engine.
TAXONOMY: dict[str, tuple[str, ...]] = {
    "Que": ("Yesno", "Wh", "WhOb", "WhSub", "Choice", "Howabout"),
    "Ans": ("Affirm", "Deny", "Agree", "Refuse", "Suspend", "Tosummons", "Clash"),
    "Inf": ("Obj", "Subj", "Repeat", "Clarif"),
    "Act": (),
    "Req": ("Repeat", "Clarif", "Summons", "Action", "Verif", "Sugg"),
    "Cont": ("Rhet", "Hm", "Que", "Ackn", "Collab"),
    "Form": ("Hello", "Bye", "Open", "Close", "Thx", "Sorry", "Nw"),
    "Inv": ("Inv", "Other"),
}

LEAF_COUNT = sum(len(v) for v in TAXONOMY.values())


@dataclass(frozen=True, order=True)
class DialogueAct:
    """One node path in the act hierarchy: ``da.<t2>.<t3>``."""

    t2: str
    t3: str | None = None

    def __post_init__(self):
        if self.t2 not in TAXONOMY:
            raise ValueError(f"unknown dialogue-act tier-2 tag: {self.t2!r}")
        if self.t3 is not None and self.t3 not in TAXONOMY[self.t2]:
            raise ValueError(f"unknown dialogue act: da.{self.t2}.{self.t3}")
        if self.t3 is None and TAXONOMY[self.t2]:
            raise ValueError(f"da.{self.t2} requires a leaf tag")

    @property
    def label(self) -> str:
        if self.t3 is None:
            return f"da.{self.t2}"
        return f"da.{self.t2}.{self.t3}"

    def matches_prefix(self, prefix: str) -> bool:
        """True if this act's label starts the given class prefix, per tier."""
        return self.label == prefix or self.label.startswith(prefix + ".") or prefix == "da"

    @classmethod
    def parse(cls, label: str) -> "DialogueAct":
        parts = label.split(".")
        if not parts or parts[0] != "da" or len(parts) not in (2, 3):
            raise ValueError(f"malformed dialogue-act label: {label!r}")
        return cls(parts[1], parts[2] if len(parts) == 3 else None)

    def __str__(self) -> str:
        return self.label


def all_leaves() -> list[DialogueAct]:
    return [DialogueAct(t2, t3) for t2, leaves in TAXONOMY.items() for t3 in leaves]


# Common acts used throughout the engine.
INVALID_OTHER = DialogueAct("Inv", "Other")
