"""
Message payloads
Date of Creation: 2026-10-17
Description: The payloads agents exchange through the mailer. Ok carries
             value announcements, NogoodMsg carries inconsistency reports,
             NoSolution ends a run, and the one-bit PuViolation and
             Conflict signals drive PU negotiation and STDMA partitioning.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import ClassVar, List, Optional, Tuple, Union

from .dcsp import AgentId, Assignment, Nogood


class MessageKind(str, Enum):
    OK = "ok"
    NOGOOD = "nogood"
    NO_SOLUTION = "no_solution"
    PU_VIOLATION = "pu_violation"
    CONFLICT = "conflict"


@dataclass(frozen=True)
class Ok:
    """
    Announces one or more assignments of the sender's variables.
    """
    assignments: Tuple[Assignment, ...]
    kind: ClassVar[MessageKind] = MessageKind.OK

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", tuple(self.assignments))
        if not self.assignments:
            raise ValueError("An ok? message carries at least one assignment.")  # noqa

    def summary(self) -> str:
        return " ".join(str(a) for a in self.assignments)


@dataclass(frozen=True)
class NogoodMsg:
    sender: AgentId
    nogood: Nogood
    kind: ClassVar[MessageKind] = MessageKind.NOGOOD

    def summary(self) -> str:
        return repr(self.nogood)


@dataclass(frozen=True)
class NoSolution:
    kind: ClassVar[MessageKind] = MessageKind.NO_SOLUTION

    def summary(self) -> str:
        return "empty nogood"


@dataclass(frozen=True)
class PuViolation:
    """
    Step-down signal from a PU whose interference cap is exceeded. Besides
    the sender it names only the reported power it answers, so a CR can
    drop it once it has stepped below that level. None answers any level.
    """
    pu: AgentId
    power: Optional[Fraction] = None
    kind: ClassVar[MessageKind] = MessageKind.PU_VIOLATION

    def summary(self) -> str:
        return f"PU{self.pu}"


@dataclass(frozen=True)
class Conflict:
    """
    One-bit signal from a victim CR to the CR that would drown it.
    """
    victim: AgentId
    kind: ClassVar[MessageKind] = MessageKind.CONFLICT

    def summary(self) -> str:
        return f"victim CR{self.victim}"


Message = Union[Ok, NogoodMsg, NoSolution, PuViolation, Conflict]

# A destination of None asks the simulation to fan the message out to every
# other agent it drives.
Outgoing = Tuple[Optional[AgentId], Message]
OutgoingList = List[Outgoing]
