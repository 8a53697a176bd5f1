"""
Mailer Class
Date of Creation: 2026-10-17
Description: Deterministic message transport for the simulation. It keeps
             a global Logical Time Counter (LTC), one FIFO queue per
             ordered agent pair and draws integer delays from a seeded
             generator. It also owns the run metrics: cycles, message
             counts per kind and the non-concurrent constraint checks.
"""

import itertools
import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Tuple

import numpy as np

from .dcsp import AgentId
from .messages import Message, MessageKind

logger = logging.getLogger(__name__)

Pair = Tuple[AgentId, AgentId]


class DelayKind(str, Enum):
    NONE = "none"
    FIXED = "fixed"
    UNIFORM = "uniform"


class ReadPolicy(str, Enum):
    """
    How many due messages a receiver reads per tick.
    """
    ALL = "all"
    SINGLE = "single"


@dataclass(frozen=True)
class DelayPolicy:
    """
    Extra delivery delay in logical steps.

    Attributes:
    - kind (DelayKind): none, fixed(ticks) or uniform(0, ticks).
    - ticks (int): The fixed delay or the uniform upper bound.
    """
    kind: DelayKind = DelayKind.NONE
    ticks: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DelayKind(self.kind))
        if self.ticks < 0:
            raise ValueError(f"Delay ticks must be non-negative, got {self.ticks}.")  # noqa
        if self.kind is DelayKind.NONE and self.ticks != 0:
            raise ValueError("The 'none' delay policy takes no ticks.")

    @classmethod
    def none(cls) -> "DelayPolicy":
        return cls(DelayKind.NONE, 0)

    @classmethod
    def fixed(cls, ticks: int) -> "DelayPolicy":
        return cls(DelayKind.FIXED, ticks)

    @classmethod
    def uniform(cls, max_ticks: int) -> "DelayPolicy":
        return cls(DelayKind.UNIFORM, max_ticks)

    @classmethod
    def from_max(cls, kind: DelayKind, max_ticks: int) -> "DelayPolicy":
        """
        Builds a policy from a kind and a bound, collapsing a zero bound to
        the 'none' policy.
        """
        if max_ticks == 0:
            return cls.none()
        return cls(DelayKind(kind), max_ticks)

    def sample(self, rng: np.random.Generator) -> int:
        if self.kind is DelayKind.NONE:
            return 0
        if self.kind is DelayKind.FIXED:
            return self.ticks
        return int(rng.integers(0, self.ticks + 1))

    def __str__(self) -> str:
        if self.kind is DelayKind.NONE:
            return "none"
        return f"{self.kind.value}({self.ticks})"


@dataclass(frozen=True)
class Envelope:
    """
    A message in flight.

    Attributes:
    - src, dst (AgentId): Sender and receiver.
    - payload (Message): The carried message.
    - send_ltc (int): LTC when the message was sent.
    - deliver_ltc (int): LTC at which it becomes deliverable.
    - carried_ltc (int): The sender's logical step stamp.
    - carried_nccc (int): The sender's NCCC counter at send time.
    - seq (int): Global send sequence number, used as a tie-break.
    """
    src: AgentId
    dst: AgentId
    payload: Message
    send_ltc: int
    deliver_ltc: int
    carried_ltc: int
    carried_nccc: int
    seq: int

    @property
    def kind(self) -> MessageKind:
        return self.payload.kind


@dataclass
class RunMetrics:
    """
    Counters of one protocol run.

    Attributes:
    - cycles (int): Simulation steps in which at least one message was read.
    - messages_by_kind (Counter): Sent messages per MessageKind.
    - nccc (int): Maximum NCCC counter over all agents.
    - checks_by_agent (Dict[AgentId, int]): Constraint checks per agent.
    """
    cycles: int = 0
    messages_by_kind: Counter = field(default_factory=Counter)
    nccc: int = 0
    checks_by_agent: Dict[AgentId, int] = field(default_factory=dict)

    def messages(self, kind: MessageKind) -> int:
        return self.messages_by_kind.get(kind, 0)

    @property
    def total_messages(self) -> int:
        return sum(self.messages_by_kind.values())

    def record_checks(self, agent_id: AgentId, checks: int) -> None:
        self.checks_by_agent[agent_id] = checks

    def observe_nccc(self, nccc: int) -> None:
        self.nccc = max(self.nccc, nccc)

    def merge(self, other: "RunMetrics") -> "RunMetrics":
        """
        Combines the metrics of two runs executed one after the other.
        """
        checks = dict(self.checks_by_agent)
        for agent_id, count in other.checks_by_agent.items():
            checks[agent_id] = checks.get(agent_id, 0) + count
        return RunMetrics(
            cycles=self.cycles + other.cycles,
            messages_by_kind=self.messages_by_kind + other.messages_by_kind,
            nccc=max(self.nccc, other.nccc),
            checks_by_agent=checks)

    def as_dict(self) -> Dict[str, object]:
        return {
            "cycles": self.cycles,
            "messages": {kind.value: self.messages(kind)
                         for kind in MessageKind},
            "nccc": self.nccc,
        }


def nccc_account(receiver_counter: int, carried_nccc: int,
                 local_checks: int) -> int:
    """
    Updates a receiver's NCCC counter: concurrent work is not counted twice.

    Parameters:
    - receiver_counter (int): The receiver's counter before delivery.
    - carried_nccc (int): The counter carried by the delivered message.
    - local_checks (int): Checks performed while processing it.

    Returns:
    - int: max(receiver_counter, carried_nccc) + local_checks.
    """
    if min(receiver_counter, carried_nccc, local_checks) < 0:
        raise ValueError("NCCC counters must be non-negative.")
    return max(receiver_counter, carried_nccc) + local_checks


class Mailer:
    """
    Routes envelopes between agents on a logical clock.

    Methods:
    - send(src, dst, payload, carried_ltc, carried_nccc): Queues a message.
    - collect_due(): Advances the LTC to the next delivery and pops every
        envelope due then.
    - is_empty(): Whether nothing is in flight.
    - record(line): Appends a line to the trace, if tracing.
    """

    def __init__(self, delay_policy: Optional[DelayPolicy] = None,
                 seed: Optional[object] = 0,
                 read_policy: ReadPolicy = ReadPolicy.ALL,
                 trace: bool = False) -> None:
        """
        Initializes a new instance of the Mailer class.

        Parameters:
        - delay_policy (Optional[DelayPolicy]): Delay policy, none if unset.
        - seed (Optional[object]): Seed or SeedSequence for the delay draws.
        - read_policy (ReadPolicy): Read all due messages or one per tick.
        - trace (bool): Whether to keep a delivery trace.
        """
        self.delay_policy = delay_policy or DelayPolicy.none()
        self.read_policy = ReadPolicy(read_policy)
        self.ltc: int = 0
        self.metrics = RunMetrics()
        self.trace: Optional[List[str]] = [] if trace else None
        self._rng = np.random.default_rng(seed)
        self._queues: Dict[Pair, Deque[Envelope]] = {}
        self._last_deliver: Dict[Pair, int] = {}
        self._seq = itertools.count()

    def send(self, src: AgentId, dst: AgentId, payload: Message,
             carried_ltc: int = 0, carried_nccc: int = 0) -> Envelope:
        """
        Queues a message, keeping per-pair FIFO order under random delays.

        Parameters:
        - src, dst (AgentId): Sender and receiver, which must differ.
        - payload (Message): The message.
        - carried_ltc (int): The sender's logical stamp.
        - carried_nccc (int): The sender's NCCC counter.

        Returns:
        - Envelope: The queued envelope.

        Raises:
        - ValueError: If src equals dst.
        """
        if src == dst:
            raise ValueError(f"Agent {src} cannot send a message to itself.")

        pair = (src, dst)
        delay = self.delay_policy.sample(self._rng)
        deliver = max(self.ltc + 1 + delay, self._last_deliver.get(pair, 0))
        envelope = Envelope(src, dst, payload, self.ltc, deliver,
                            carried_ltc, carried_nccc, next(self._seq))

        self._queues.setdefault(pair, deque()).append(envelope)
        self._last_deliver[pair] = deliver
        self.metrics.messages_by_kind[payload.kind] += 1
        return envelope

    def is_empty(self) -> bool:
        return not self._queues

    def in_flight(self) -> int:
        return sum(len(queue) for queue in self._queues.values())

    def next_delivery_ltc(self) -> Optional[int]:
        if not self._queues:
            return None
        return min(queue[0].deliver_ltc for queue in self._queues.values())

    def observe_stamp(self, stamp: int) -> None:
        """
        Raises the LTC if an agent's carried stamp is ahead of it.
        """
        if stamp > self.ltc:
            self.ltc = stamp

    def collect_due(self) -> Dict[AgentId, List[Envelope]]:
        """
        Advances the LTC and pops the envelopes due at the new tick.

        The LTC moves to the later of ltc + 1 and the earliest pending
        delivery. Under the 'all' read policy every due envelope is popped;
        under 'single' each receiver gets only its oldest due envelope.

        Returns:
        - Dict[AgentId, List[Envelope]]: Due envelopes per receiver, each
            list ordered by (src, seq).
        """
        next_ltc = self.next_delivery_ltc()
        if next_ltc is None:
            return {}
        self.ltc = max(self.ltc + 1, next_ltc)

        batches: Dict[AgentId, List[Envelope]] = {}
        if self.read_policy is ReadPolicy.ALL:
            for pair in sorted(self._queues):
                queue = self._queues[pair]
                while queue and queue[0].deliver_ltc <= self.ltc:
                    batches.setdefault(pair[1], []).append(queue.popleft())
        else:
            oldest: Dict[AgentId, Pair] = {}
            for pair in sorted(self._queues):
                head = self._queues[pair][0]
                if head.deliver_ltc > self.ltc:
                    continue
                best = oldest.get(pair[1])
                if best is None or head.seq < self._queues[best][0].seq:
                    oldest[pair[1]] = pair
            for dst, pair in oldest.items():
                batches[dst] = [self._queues[pair].popleft()]

        for pair in [p for p, queue in self._queues.items() if not queue]:
            del self._queues[pair]
        for envelopes in batches.values():
            envelopes.sort(key=lambda e: (e.src, e.seq))
        return batches

    def record(self, line: str) -> None:
        if self.trace is not None:
            self.trace.append(line)

    def record_delivery(self, envelope: Envelope) -> None:
        if self.trace is not None:
            self.trace.append(
                f"{self.ltc},{envelope.src},{envelope.dst},"
                f"{envelope.kind.value},{envelope.payload.summary()}")
