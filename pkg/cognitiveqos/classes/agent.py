"""
Agent Class
Date of Creation: 2026-10-17
Description: Base class of every actor the simulation drives. An agent
             owns its state exclusively, reacts to a batch of delivered
             messages and returns the messages it wants to send. The
             simulation keeps its logical stamp and NCCC counter.
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Sequence

from .dcsp import AgentId, CheckCounter, Constraint, Value, VarId
from .messages import Message, OutgoingList

logger = logging.getLogger(__name__)


class Agent(ABC):
    """
    Represents one message-passing actor.

    Attributes:
    - agent_id (AgentId): Identifier, also used as the tie-break order.
    - checks (CheckCounter): Constraint checks performed by this agent.
    - nccc (int): Non-concurrent constraint check counter.
    - stamp (int): Logical step stamp, carried on outgoing messages.
    - events (List[str]): Pending human-readable events for the trace.
    - halted (bool): True once the agent stopped reacting to messages.
    - constraints (List[Constraint]): Constraints the agent checks.

    Methods:
    - start(): Returns the messages sent when the run begins.
    - receive(batch): Processes one batch of messages atomically.
    - is_consistent(): Whether the current state satisfies the agent.
    - current_assignments(): The agent's current variable values.
    - drain_events(): Returns and clears the pending events.
    """

    def __init__(self, agent_id: AgentId, verbose: bool = False,
                 nccc: int = 0) -> None:
        if agent_id < 0:
            raise ValueError(f"Agent ids must be non-negative, got {agent_id}.")  # noqa
        self.agent_id: AgentId = agent_id
        self.checks = CheckCounter()
        self.nccc: int = nccc
        self.stamp: int = 0
        self.events: List[str] = []
        self.halted: bool = False
        self.constraints: List[Constraint] = []
        self._verbose = verbose

    @abstractmethod
    def start(self) -> OutgoingList:
        ...

    @abstractmethod
    def receive(self, batch: Sequence[Message]) -> OutgoingList:
        ...

    def is_consistent(self) -> bool:
        return True

    def current_assignments(self) -> Dict[VarId, Value]:
        return {}

    def log_event(self, text: str) -> None:
        self.events.append(text)
        level = logging.INFO if self._verbose else logging.DEBUG
        logger.log(level, "agent %s: %s", self.agent_id, text)

    def drain_events(self) -> List[str]:
        events, self.events = self.events, []
        return events
