"""
PU negotiation
Date of Creation: 2026-10-17
Description: First protocol phase. Every CR starts at its power budget and
             reports its power to every PU. A PU whose aggregate
             interference exceeds its cap sends a one-bit violation signal
             to each CR whose own contribution exceeds the fair share of
             the cap; a signalled CR steps down one quantization level and
             reports again. The final powers are the caps the CRs may use
             afterwards; a CR driven to 0 mW is silenced.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Set, Tuple

from ..classes.agent import Agent
from ..classes.dcsp import AgentId, Assignment, Value, VarId
from ..classes.mailer import Mailer
from ..classes.messages import Message, Ok, OutgoingList, PuViolation
from ..classes.scenario import CrLink, PuLink, Scenario
from ..helpers.radio import power_domain
from .simulation import RunOutcome, Simulation

logger = logging.getLogger(__name__)


class CrNegotiator(Agent):
    """
    CR side of the negotiation.

    Attributes:
    - domain (Domain): The quantized power levels, budget first.
    - level (int): Index of the current power level.
    - steps (int): Number of step-downs taken.
    - reported (List[Fraction]): Every power level reported, in order.
    """

    def __init__(self, link: CrLink, pu_ids: Sequence[AgentId],
                 verbose: bool = False, nccc: int = 0) -> None:
        super().__init__(link.id, verbose, nccc)
        self.variable = VarId(link.id, 0)
        self.domain = power_domain(link.power_budget, link.power_step)
        self.level = 0
        self.steps = 0
        self.reported: List[Fraction] = []
        self._pu_ids = sorted(pu_ids)

    @property
    def power(self) -> Fraction:
        return self.domain[self.level].scalar

    @property
    def silenced(self) -> bool:
        return self.power == 0

    def _report(self) -> OutgoingList:
        self.reported.append(self.power)
        message = Ok((Assignment(self.variable, self.domain[self.level]),))
        return [(pu, message) for pu in self._pu_ids]

    def start(self) -> OutgoingList:
        return self._report()

    def receive(self, batch: Sequence[Message]) -> OutgoingList:
        """
        Steps down one level if a signal in the batch answers the current
        power. Signals about a level already left are stale and ignored;
        the PU re-checks the newer report anyway.
        """
        signals = [m for m in batch if isinstance(m, PuViolation)]
        current = [m for m in signals
                   if m.power is None or m.power == self.power]
        if len(current) < len(signals):
            self.log_event(f"ignored {len(signals) - len(current)} stale "
                           f"violation signal(s)")
        signalled = sorted({m.pu for m in current})
        if not signalled or self.level == len(self.domain) - 1:
            return []
        self.level += 1
        self.steps += 1
        self.log_event(f"violation from PU {signalled}, power -> "
                       f"{self.domain[self.level]}")
        return self._report()

    def current_assignments(self) -> Dict[VarId, Value]:
        return {self.variable: self.domain[self.level]}


class PuMonitor(Agent):
    """
    PU side of the negotiation. Works in exact rational arithmetic on the
    float gains.

    Attributes:
    - cap (Fraction): The interference cap in mW.
    - reported (Dict[AgentId, Fraction]): Latest power reported per CR.
    """

    def __init__(self, pu: PuLink, row: int, scenario: Scenario,
                 verbose: bool = False, nccc: int = 0) -> None:
        super().__init__(pu.id, verbose, nccc)
        self.cap = Fraction(pu.interference_cap)
        self.reported: Dict[AgentId, Fraction] = {}
        self._gains: Dict[AgentId, Fraction] = {
            cr_id: Fraction(float(scenario.gains.cr_to_pu[row, i]))
            for i, cr_id in enumerate(scenario.cr_ids)}
        self._notified: Set[Tuple[AgentId, Fraction]] = set()

    def interference(self) -> Fraction:
        return sum((self._gains[cr] * p for cr, p in self.reported.items()),
                   Fraction(0))

    def start(self) -> OutgoingList:
        return []

    def receive(self, batch: Sequence[Message]) -> OutgoingList:
        for message in batch:
            if isinstance(message, Ok):
                for assignment in message.assignments:
                    self.reported[assignment.var.owner] = \
                        assignment.value.scalar

        self.checks.increment()
        total = self.interference()
        if total <= self.cap:
            return []

        active = sorted(cr for cr, p in self.reported.items() if p > 0)
        share = self.cap / len(active)
        outgoing: OutgoingList = []
        for cr in active:
            power = self.reported[cr]
            if self._gains[cr] * power <= share or \
                    (cr, power) in self._notified:
                continue
            self._notified.add((cr, power))
            outgoing.append((cr, PuViolation(self.agent_id, power)))
        if outgoing:
            self.log_event(f"interference {float(total):.3e} mW over cap "
                           f"{float(self.cap):.3e} mW, signalling "
                           f"{[dst for dst, _ in outgoing]}")
        return outgoing

    def is_consistent(self) -> bool:
        return self.interference() <= self.cap


@dataclass
class NegotiationResult:
    """
    Outcome of the PU negotiation.

    Attributes:
    - caps (Dict[AgentId, Fraction]): Final power per CR, in mW.
    - steps (Dict[AgentId, int]): Step-downs taken per CR.
    - reported (Dict[AgentId, List[Fraction]]): Reported powers per CR.
    - outcome (RunOutcome): How the negotiation ended.
    """
    caps: Dict[AgentId, Fraction]
    steps: Dict[AgentId, int]
    reported: Dict[AgentId, List[Fraction]] = field(default_factory=dict)
    outcome: RunOutcome = RunOutcome.SOLVED

    @property
    def silenced(self) -> List[AgentId]:
        return sorted(cr for cr, cap in self.caps.items() if cap == 0)


def phase1_pu_negotiation(scenario: Scenario, mailer: Mailer,
                          max_cycles: int = 20000,
                          verbose: bool = False) -> NegotiationResult:
    """
    Runs the PU negotiation to its fixpoint.

    Parameters:
    - scenario (Scenario): The deployment.
    - mailer (Mailer): The transport of this protocol run.
    - max_cycles (int): Cycle cap; powers only decrease, so hitting it
        indicates a bug.
    - verbose (bool): Log decisions at INFO.

    Returns:
    - NegotiationResult: Per-CR caps and step counts.
    """
    pu_ids = [pu.id for pu in scenario.pu_links]
    negotiators = [CrNegotiator(link, pu_ids, verbose)
                   for link in scenario.cr_links]
    if not pu_ids:
        return NegotiationResult(
            caps={n.agent_id: n.power for n in negotiators},
            steps={n.agent_id: 0 for n in negotiators},
            reported={n.agent_id: [n.power] for n in negotiators})

    monitors = [PuMonitor(pu, k, scenario, verbose)
                for k, pu in enumerate(scenario.pu_links)]
    simulation = Simulation(mailer, negotiators + monitors, verbose=verbose)
    outcome = simulation.run(max_cycles)
    if outcome is not RunOutcome.SOLVED:
        logger.error("PU negotiation ended with %s", outcome.value)

    result = NegotiationResult(
        caps={n.agent_id: n.power for n in negotiators},
        steps={n.agent_id: n.steps for n in negotiators},
        reported={n.agent_id: list(n.reported) for n in negotiators},
        outcome=outcome)
    logger.info("PU negotiation: %d CRs silenced, caps %s",
                len(result.silenced),
                {cr: str(cap) for cr, cap in result.caps.items()})
    return result
