"""
QoS protocol
Date of Creation: 2026-10-17
Description: Runs the full protocol on one scenario. The PU negotiation
             fixes per-CR caps, then either CDMA allocation (equal or
             unequal rates) or the STDMA pipeline of partitioning, group
             power and round-robin scheduling. All phases share one mailer,
             so the run metrics cover every message and check.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..classes.dcsp import AgentId
from ..classes.mailer import Mailer, RunMetrics
from ..classes.messages import MessageKind
from ..classes.scenario import Scenario
from ..errors import InfeasibleSchedule
from ..helpers.config import Mode, SimulationParams
from ..helpers.radio import (meets, objective_log_rate, power_domain,
                             pu_safe, rate_sinr_requirement, sinr)
from .cdma import phase2_cdma_equal, phase2_cdma_unequal
from .pu_negotiation import phase1_pu_negotiation
from .simulation import RunOutcome
from .stdma import (FrameSchedule, InterferingPartition, SlotGroup,
                    stdma_build_partition, stdma_group_power, stdma_schedule)

logger = logging.getLogger(__name__)

# Conflict bits and NoSolution broadcasts stay out of the message totals.
COUNTED_MESSAGES = (MessageKind.OK, MessageKind.NOGOOD,
                    MessageKind.PU_VIOLATION)


class Phase(str, Enum):
    PU_NEGOTIATION = "pu_negotiation"
    CR_AWCS = "cr_awcs"
    STDMA_SCHEDULE = "stdma_schedule"
    DONE = "done"
    INFEASIBLE = "infeasible"


_PHASE_RANK = {Phase.PU_NEGOTIATION: 0, Phase.CR_AWCS: 1,
               Phase.STDMA_SCHEDULE: 2, Phase.DONE: 3, Phase.INFEASIBLE: 3}


@dataclass
class ProtocolRun:
    """
    State and result of one protocol run.

    Attributes:
    - scenario (Scenario): The deployment.
    - seed (int): Seed of the run's mailer.
    - phase (Phase): Current phase, moving only forward.
    - pu_caps (Dict[AgentId, Fraction]): Negotiated cap per CR in mW.
    - phase1_steps (Dict[AgentId, int]): Step-downs per CR in the
        negotiation.
    - phase1_reported (Dict[AgentId, List[Fraction]]): Reported powers per
        CR in the negotiation.
    - silenced (List[AgentId]): CRs capped at 0 mW.
    - infeasible (List[AgentId]): CRs that cannot meet their threshold in
        STDMA even alone.
    - powers (Dict[AgentId, Fraction]): Final powers of served CRs in mW.
    - rates (Dict[AgentId, int]): Final rates in bit/s.
    - partition (Optional[InterferingPartition]): STDMA sets.
    - groups (Dict[AgentId, List[SlotGroup]]): STDMA slot groups per head.
    - schedules (List[FrameSchedule]): STDMA frames, first frame first.
    - outcome (Optional[RunOutcome]): How the solving phase ended.
    - failure (str): Reason the run became infeasible, if it did.
    - metrics (RunMetrics): Counters over all phases.
    - trace (Optional[List[str]]): Delivery trace, when requested.
    """
    scenario: Scenario
    seed: int = 0
    phase: Phase = Phase.PU_NEGOTIATION
    pu_caps: Dict[AgentId, Fraction] = field(default_factory=dict)
    phase1_steps: Dict[AgentId, int] = field(default_factory=dict)
    phase1_reported: Dict[AgentId, List[Fraction]] = \
        field(default_factory=dict)
    silenced: List[AgentId] = field(default_factory=list)
    infeasible: List[AgentId] = field(default_factory=list)
    powers: Dict[AgentId, Fraction] = field(default_factory=dict)
    rates: Dict[AgentId, int] = field(default_factory=dict)
    partition: Optional[InterferingPartition] = None
    groups: Dict[AgentId, List[SlotGroup]] = field(default_factory=dict)
    schedules: List[FrameSchedule] = field(default_factory=list)
    outcome: Optional[RunOutcome] = None
    failure: str = ""
    metrics: RunMetrics = field(default_factory=RunMetrics)
    trace: Optional[List[str]] = None

    def advance(self, phase: Phase) -> None:
        """
        Moves to a later phase.

        Raises:
        - ValueError: If the run is finished or the phase is not later.
        """
        if self.phase in (Phase.DONE, Phase.INFEASIBLE):
            raise ValueError(f"Run already finished in {self.phase.value}.")
        if phase is not Phase.INFEASIBLE and \
                _PHASE_RANK[phase] <= _PHASE_RANK[self.phase]:
            raise ValueError(f"Cannot move from {self.phase.value} back to "
                             f"{phase.value}.")
        self.phase = phase

    def fail(self, reason: str) -> None:
        self.failure = reason
        self.advance(Phase.INFEASIBLE)
        logger.info("run infeasible: %s", reason)

    @property
    def feasible(self) -> bool:
        return self.phase is Phase.DONE

    @property
    def avg_power_mw(self) -> float:
        """
        Mean allocated power over all CRs, silenced ones at 0 mW; NaN if
        the run is infeasible.
        """
        if not self.feasible:
            return math.nan
        return float(np.mean([float(self.powers.get(cr, 0))
                              for cr in self.scenario.cr_ids]))

    @property
    def sum_log_rate(self) -> float:
        """
        Proportional-fairness objective over the served CRs. Equal-rate
        CDMA serves everyone at R_min; STDMA counts R_min scaled by the
        share of the first frame a CR transmits in.
        """
        if not self.feasible:
            return math.nan
        served = sorted(self.powers)
        if not served:
            return 0.0
        mode = self.scenario.mode
        if mode is Mode.CDMA_UNEQUAL:
            rates = [self.rates[cr] for cr in served]
        elif mode is Mode.STDMA:
            frame = self.schedules[0]
            rates = [self.scenario.link(cr).rate_min * frame.slots_for(cr) /
                     frame.frame_slots for cr in served]
        else:
            rates = [self.scenario.link(cr).rate_min for cr in served]
        return objective_log_rate(rates)


def _served_powers(run: ProtocolRun) -> np.ndarray:
    return np.array([float(run.powers.get(cr, 0))
                     for cr in run.scenario.cr_ids])


def verify_run(run: ProtocolRun) -> List[str]:
    """
    Checks a finished run against the protocol guarantees: negotiation
    monotone and bounded, powers within caps, PU caps respected exactly
    and every served CR meeting its SINR requirement.

    Parameters:
    - run (ProtocolRun): A finished run.

    Returns:
    - List[str]: One line per violated guarantee, empty if all hold.
    """
    scenario = run.scenario
    problems: List[str] = []
    for cr, reported in run.phase1_reported.items():
        if any(b > a for a, b in zip(reported, reported[1:])):
            problems.append(f"CR{cr} raised its power during negotiation")
        link = scenario.link(cr)
        bound = len(power_domain(link.power_budget, link.power_step))
        if run.phase1_steps.get(cr, 0) > bound:
            problems.append(f"CR{cr} took more negotiation steps than "
                            f"power levels")
    for cr, power in run.powers.items():
        if power > run.pu_caps.get(cr, 0):
            problems.append(f"CR{cr} power {power} mW above its cap")
    if not pu_safe(run.powers, scenario):
        problems.append("PU interference cap exceeded")
    if not run.feasible:
        return problems

    if scenario.mode is Mode.STDMA:
        for frame in run.schedules:
            for slot, active in enumerate(frame.slot_table()):
                powers = np.zeros(scenario.n_cr)
                for cr in active:
                    powers[scenario.index_of(cr)] = float(run.powers[cr])
                for cr in active:
                    value = sinr(scenario.index_of(cr), powers, scenario)
                    if not meets(value, scenario.link(cr).sinr_threshold):
                        problems.append(f"CR{cr} misses its SINR in slot "
                                        f"{slot} of frame "
                                        f"{frame.frame_index}")
            for cr in frame.cr_ids:
                if frame.slots_for(cr) < scenario.link(cr).demand:
                    problems.append(f"CR{cr} short of slots in frame "
                                    f"{frame.frame_index}")
        return problems

    powers = _served_powers(run)
    for cr in sorted(run.powers):
        link = scenario.link(cr)
        required = link.sinr_threshold
        if scenario.mode is Mode.CDMA_UNEQUAL:
            required = rate_sinr_requirement(run.rates[cr], link)
        if not meets(sinr(scenario.index_of(cr), powers, scenario), required):
            problems.append(f"CR{cr} misses its SINR requirement")
    return problems


class QosProtocol:
    """
    Runs the protocol for one scenario.

    Attributes:
    - scenario (Scenario): The deployment; its mode picks the access
        scheme.
    - params (SimulationParams): Delay, read policy, cycle cap, nogood
        learning and STDMA frame count.
    - range_ratio (float): Interference-range ratio for CDMA constraints,
        0 for the exact SINR.
    - seed (int): Seed of the mailer's delay draws.

    Methods:
    - run(): Executes every phase and returns the ProtocolRun.
    """

    def __init__(self, scenario: Scenario,
                 params: SimulationParams = SimulationParams(),
                 range_ratio: float = 0.0, seed: int = 0,
                 trace: bool = False, verbose: bool = False) -> None:
        self.scenario = scenario
        self.params = params
        self.range_ratio = range_ratio
        self.seed = seed
        self.trace = trace
        self.verbose = verbose

    def _phase_marker(self, mailer: Mailer, phase: Phase) -> None:
        mailer.record(f"# {mailer.ltc} phase: {phase.value}")

    def run(self) -> ProtocolRun:
        mailer = Mailer(self.params.delay_policy(),
                        np.random.SeedSequence(self.seed),
                        self.params.read_policy, self.trace)
        run = ProtocolRun(self.scenario, self.seed, metrics=mailer.metrics,
                          trace=mailer.trace)

        self._phase_marker(mailer, Phase.PU_NEGOTIATION)
        negotiation = phase1_pu_negotiation(
            self.scenario, mailer, self.params.max_cycles, self.verbose)
        run.pu_caps = negotiation.caps
        run.phase1_steps = negotiation.steps
        run.phase1_reported = negotiation.reported
        run.silenced = negotiation.silenced
        if run.silenced:
            logger.info("silenced CRs %s", run.silenced)
        if negotiation.outcome is not RunOutcome.SOLVED:
            run.outcome = negotiation.outcome
            run.fail(f"PU negotiation ended with {negotiation.outcome.value}")
            return run

        run.advance(Phase.CR_AWCS)
        self._phase_marker(mailer, Phase.CR_AWCS)
        if self.scenario.mode is Mode.STDMA:
            self._run_stdma(run, mailer)
        else:
            self._run_cdma(run, mailer)

        if run.phase is not Phase.INFEASIBLE:
            run.advance(Phase.DONE)
        self._phase_marker(mailer, run.phase)
        problems = verify_run(run)
        for problem in problems:
            logger.error("seed %d: %s", self.seed, problem)
        return run

    def _run_cdma(self, run: ProtocolRun, mailer: Mailer) -> None:
        allocate = phase2_cdma_unequal \
            if self.scenario.mode is Mode.CDMA_UNEQUAL else phase2_cdma_equal
        result = allocate(self.scenario, run.pu_caps, mailer, self.params,
                          self.range_ratio, self.verbose)
        run.outcome = result.outcome
        if result.outcome is not RunOutcome.SOLVED:
            run.fail(f"CR allocation ended with {result.outcome.value}")
            return
        run.powers = result.powers
        run.rates = result.rates

    def _run_stdma(self, run: ProtocolRun, mailer: Mailer) -> None:
        partition, graph = stdma_build_partition(
            self.scenario, run.pu_caps, mailer, self.params.max_cycles,
            self.verbose)
        run.partition = partition
        power = stdma_group_power(partition, graph, self.scenario,
                                  run.pu_caps, mailer, self.params,
                                  self.verbose)
        run.powers = power.powers
        run.groups = power.groups
        run.infeasible = power.infeasible
        if run.infeasible:
            run.outcome = RunOutcome.NO_SOLUTION
            run.fail(f"CRs {run.infeasible} miss their threshold alone")
            return
        run.outcome = RunOutcome.SOLVED

        run.advance(Phase.STDMA_SCHEDULE)
        self._phase_marker(mailer, Phase.STDMA_SCHEDULE)
        demands = {link.id: link.demand for link in self.scenario.cr_links}
        try:
            for frame in range(self.params.frames):
                run.schedules.append(stdma_schedule(
                    partition, run.groups, demands,
                    self.scenario.frame_slots, frame))
        except InfeasibleSchedule as error:
            run.fail(str(error))


class FrameRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    frame_index: int
    order: List[int]
    slots_per_pattern: List[int]
    slot_table: List[List[int]]


class ResultRecord(BaseModel):
    """
    The result file of one run.
    """
    model_config = ConfigDict(frozen=True)

    seed: int
    scenario_seed: Optional[int]
    mode: Mode
    phase: Phase
    outcome: Optional[RunOutcome]
    feasible: bool
    failure: str
    silenced: List[int]
    infeasible: List[int]
    pu_caps_mw: Dict[str, float]
    powers_mw: Dict[str, float]
    rates_bps: Dict[str, int]
    partition: List[List[int]]
    schedule: List[FrameRecord]
    metrics: Dict[str, Any]
    avg_power_mw: Optional[float]
    sum_log_rate: Optional[float]
    config: SimulationParams

    @classmethod
    def from_run(cls, run: ProtocolRun,
                 params: SimulationParams) -> "ResultRecord":
        def keyed(values: Dict[AgentId, object], cast) -> Dict[str, object]:
            return {str(cr): cast(values[cr]) for cr in sorted(values)}

        def finite(value: float) -> Optional[float]:
            return None if math.isnan(value) else value

        metrics = run.metrics.as_dict()
        metrics["messages_total"] = sum(
            run.metrics.messages(kind) for kind in COUNTED_MESSAGES)
        return cls(
            seed=run.seed, scenario_seed=run.scenario.seed,
            mode=run.scenario.mode, phase=run.phase, outcome=run.outcome,
            feasible=run.feasible, failure=run.failure,
            silenced=run.silenced, infeasible=run.infeasible,
            pu_caps_mw=keyed(run.pu_caps, float),
            powers_mw=keyed(run.powers, float),
            rates_bps=keyed(run.rates, int),
            partition=[list(s) for s in run.partition.sets]
            if run.partition else [],
            schedule=[FrameRecord(
                frame_index=frame.frame_index, order=list(frame.order),
                slots_per_pattern=list(frame.slots),
                slot_table=frame.slot_table()) for frame in run.schedules],
            metrics=metrics,
            avg_power_mw=finite(run.avg_power_mw),
            sum_log_rate=finite(run.sum_log_rate),
            config=params)
