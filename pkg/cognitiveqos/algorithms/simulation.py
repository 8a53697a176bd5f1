"""
Simulation Class
Date of Creation: 2026-10-17
Description: Sequential discrete-event loop driving a set of agents over a
             Mailer. Each cycle delivers every envelope due at the next
             tick, lets each receiver process its batch atomically, accounts
             NCCC and forwards the replies. An omniscient observer decides
             quiescence.
"""

import logging
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from ..classes.agent import Agent
from ..classes.dcsp import AgentId, Constraint, Value, VarId
from ..classes.mailer import Mailer, nccc_account
from ..classes.messages import MessageKind, NoSolution, OutgoingList
from ..helpers.consistency import satisfies_all

logger = logging.getLogger(__name__)


class CycleStatus(str, Enum):
    QUIESCENT = "quiescent"
    ACTIVE = "active"
    NO_SOLUTION = "no_solution"
    STALLED = "stalled"


class RunOutcome(str, Enum):
    SOLVED = "solved"
    NO_SOLUTION = "no_solution"
    STALLED = "stalled"
    CYCLE_CAP = "cycle_cap"


def collect_constraints(agents: Iterable[Agent]) -> List[Constraint]:
    """
    Returns the constraints of all agents, each constraint object once.
    """
    seen: Dict[int, Constraint] = {}
    for agent in agents:
        for constraint in agent.constraints:
            seen.setdefault(id(constraint), constraint)
    return list(seen.values())


def combined_assignment(agents: Iterable[Agent]) -> Dict[VarId, Value]:
    values: Dict[VarId, Value] = {}
    for agent in agents:
        values.update(agent.current_assignments())
    return values


def quiescence_check(mailer: Mailer, agents: Sequence[Agent],
                     constraints: Optional[Sequence[Constraint]] = None) -> \
        bool:
    """
    Omniscient termination test.

    Parameters:
    - mailer (Mailer): The transport.
    - agents (Sequence[Agent]): Every agent of the run.
    - constraints (Optional[Sequence[Constraint]]): The global constraints,
        collected from the agents when omitted.

    Returns:
    - bool: True iff nothing is in flight, every agent is consistent with
        its view and the combined assignment satisfies every constraint.
    """
    if not mailer.is_empty():
        return False
    if not all(agent.is_consistent() for agent in agents):
        return False
    if constraints is None:
        constraints = collect_constraints(agents)
    return satisfies_all(constraints, combined_assignment(agents))


class Simulation:
    """
    Drives agents over a mailer until quiescence, NoSolution or a cap.

    Attributes:
    - mailer (Mailer): Shared transport and metrics.
    - agents (Dict[AgentId, Agent]): The agents, by id.
    - cycles (int): Cycles run by this simulation.
    - no_solution (bool): Whether a NoSolution broadcast was observed.

    Methods:
    - start(): Lets every agent send its initial messages.
    - advance_cycle(): Runs one cycle and returns its status.
    - run(max_cycles): Runs until a terminal status or the cycle cap.
    """

    def __init__(self, mailer: Mailer, agents: Sequence[Agent],
                 global_check: Optional[Callable[[], bool]] = None,
                 verbose: bool = False) -> None:
        """
        Initializes a new instance of the Simulation class.

        Parameters:
        - mailer (Mailer): The transport. It may already carry metrics of
            earlier phases; agents start from its NCCC baseline.
        - agents (Sequence[Agent]): Agents with unique ids.
        - global_check (Optional[Callable[[], bool]]): Observer for
            quiescence, quiescence_check over the agents if omitted.
        - verbose (bool): Log every cycle at INFO instead of DEBUG.

        Raises:
        - ValueError: If agent ids are not unique or no agent is given.
        """
        if not agents:
            raise ValueError("A simulation needs at least one agent.")
        ids = [agent.agent_id for agent in agents]
        if len(ids) != len(set(ids)):
            raise ValueError(f"Agent ids must be unique, got {sorted(ids)}.")

        self.mailer = mailer
        self.agents: Dict[AgentId, Agent] = {
            agent.agent_id: agent for agent in sorted(
                agents, key=lambda a: a.agent_id)}
        self.cycles = 0
        self.no_solution = False
        self._started = False
        self._verbose = verbose
        self._constraints = collect_constraints(self.agents.values())
        self._global_check = global_check or (
            lambda: quiescence_check(self.mailer, list(self.agents.values()),
                                     self._constraints))
        for agent in self.agents.values():
            agent.nccc = max(agent.nccc, mailer.metrics.nccc)

    def _log(self, message: str, *args: object) -> None:
        level = logging.INFO if self._verbose else logging.DEBUG
        logger.log(level, message, *args)

    def _dispatch(self, agent: Agent, outgoing: OutgoingList) -> None:
        """
        Sends an agent's replies, fanning out broadcasts to the other agents
        of this simulation.
        """
        for dst, payload in outgoing:
            recipients = [other for other in self.agents
                          if other != agent.agent_id] if dst is None \
                else [dst]
            if isinstance(payload, NoSolution) and not recipients:
                self.no_solution = True
            for recipient in recipients:
                self.mailer.send(agent.agent_id, recipient, payload,
                                 agent.stamp, agent.nccc)

    def _flush_events(self, agent: Agent) -> None:
        for event in agent.drain_events():
            self.mailer.record(f"# {self.mailer.ltc} agent {agent.agent_id}: {event}")  # noqa

    def _account(self, agent: Agent, before: int, carried_nccc: int) -> None:
        local = agent.checks.count - before
        agent.nccc = nccc_account(agent.nccc, carried_nccc, local)
        self.mailer.metrics.observe_nccc(agent.nccc)
        self.mailer.metrics.record_checks(agent.agent_id, agent.checks.count)

    def start(self) -> None:
        """
        Lets every agent, in id order, announce its initial state.
        """
        if self._started:
            return
        self._started = True
        for agent in self.agents.values():
            before = agent.checks.count
            outgoing = agent.start()
            self._account(agent, before, 0)
            self._flush_events(agent)
            self._dispatch(agent, outgoing)

    def advance_cycle(self) -> CycleStatus:
        """
        Runs one cycle: delivers the next tick's envelopes, processes each
        receiver's batch and sends the replies.

        Returns:
        - CycleStatus: NO_SOLUTION once a NoSolution broadcast has been
            delivered, QUIESCENT or STALLED when nothing is in flight, and
            ACTIVE otherwise.
        """
        self.start()
        if self.no_solution:
            return CycleStatus.NO_SOLUTION
        if self.mailer.is_empty():
            if self._global_check():
                return CycleStatus.QUIESCENT
            return CycleStatus.STALLED

        batches = self.mailer.collect_due()
        self.cycles += 1
        self.mailer.metrics.cycles += 1
        self._log("cycle %d at ltc %d: %d receivers", self.cycles,
                  self.mailer.ltc, len(batches))

        for dst in sorted(batches):
            envelopes = batches[dst]
            agent = self.agents.get(dst)
            if agent is None:
                raise ValueError(f"Envelope addressed to unknown agent {dst}.")

            for envelope in envelopes:
                self.mailer.record_delivery(envelope)
                if envelope.kind is MessageKind.NO_SOLUTION:
                    self.no_solution = True

            carried_ltc = max(e.carried_ltc for e in envelopes)
            carried_nccc = max(e.carried_nccc for e in envelopes)
            self.mailer.observe_stamp(carried_ltc)
            agent.stamp = max(agent.stamp, carried_ltc) + 1

            before = agent.checks.count
            outgoing = agent.receive([e.payload for e in envelopes])
            self._account(agent, before, carried_nccc)
            self._flush_events(agent)
            self._dispatch(agent, outgoing)

        if self.no_solution:
            return CycleStatus.NO_SOLUTION
        return CycleStatus.ACTIVE

    def run(self, max_cycles: int = 20000) -> RunOutcome:
        """
        Runs cycles until quiescence, NoSolution, a stall or the cap.

        Parameters:
        - max_cycles (int): Cycle cap for this simulation.

        Returns:
        - RunOutcome: How the run ended.
        """
        if max_cycles < 1:
            raise ValueError(f"max_cycles must be positive, got {max_cycles}.")

        outcome = RunOutcome.CYCLE_CAP
        while True:
            status = self.advance_cycle()
            if status is CycleStatus.QUIESCENT:
                outcome = RunOutcome.SOLVED
                break
            if status is CycleStatus.NO_SOLUTION:
                outcome = RunOutcome.NO_SOLUTION
                break
            if status is CycleStatus.STALLED:
                logger.warning("Run stalled after %d cycles with an "
                               "unsatisfied constraint.", self.cycles)
                outcome = RunOutcome.STALLED
                break
            if self.cycles >= max_cycles:
                logger.warning("Cycle cap of %d reached.", max_cycles)
                break

        self.mailer.record(f"# {self.mailer.ltc} outcome: {outcome.value}")
        self._log("run ended: %s after %d cycles", outcome.value, self.cycles)
        return outcome

    def assignments(self) -> Dict[VarId, Value]:
        return combined_assignment(self.agents.values())
