"""
CDMA power and rate allocation
Date of Creation: 2026-10-17
Description: Second protocol phase for CDMA. Every non-silenced CR runs AWCS
             on its power, with the domain cut at its negotiated cap so PU
             caps can never be exceeded again. With equal rates each CR has
             one SINR constraint; with unequal rates each CR also owns a
             rate variable whose SINR requirement grows with the rate.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

from ..classes.dcsp import AgentId, Constraint, Domain, Value, VarId
from ..classes.mailer import Mailer
from ..classes.scenario import Scenario
from ..helpers.config import SimulationParams
from ..helpers.radio import (interferes, meets, power_domain, rate_domain,
                             rate_sinr_requirement)
from .awcs_multi import MultiAwcsAgent
from .awcs_single import AwcsAgent
from .simulation import RunOutcome, Simulation

logger = logging.getLogger(__name__)

POWER = 0
RATE = 1

Requirement = Callable[[Mapping[VarId, Value]], float]


@dataclass
class InterferenceScope:
    """
    The interferers a CR's SINR constraint names, and the constant
    background standing in for everything else.

    Attributes:
    - cr_id (AgentId): The victim CR.
    - interferers (List[Tuple[AgentId, float]]): In-range CRs and gains.
    - background (float): Noise, PU floor and out-of-range CRs at their
        caps, in mW.
    """
    cr_id: AgentId
    interferers: List[Tuple[AgentId, float]]
    background: float


@dataclass
class CdmaResult:
    """
    Outcome of a CDMA allocation.

    Attributes:
    - outcome (RunOutcome): How the AWCS run ended.
    - powers (Dict[AgentId, Fraction]): Final powers in mW, empty unless
        solved.
    - rates (Dict[AgentId, int]): Final rates in bit/s, empty unless
        solved.
    """
    outcome: RunOutcome
    powers: Dict[AgentId, Fraction] = field(default_factory=dict)
    rates: Dict[AgentId, int] = field(default_factory=dict)


def capped_power_domain(scenario: Scenario, cr_id: AgentId,
                        cap: Fraction) -> Domain:
    """
    The power levels of a CR at or below its cap, without the 0 mW level.

    Raises:
    - ValueError: If the cap leaves no positive level.
    """
    link = scenario.link(cr_id)
    full = power_domain(link.power_budget, link.power_step)
    capped = full.truncated(Value.mw(cap))
    return Domain(tuple(v for v in capped if v.scalar > 0))


def interference_scope(scenario: Scenario, cr_id: AgentId,
                       caps: Mapping[AgentId, Fraction],
                       active: Sequence[AgentId],
                       range_ratio: float) -> InterferenceScope:
    """
    Splits the active CRs into interferers within range of cr_id, which the
    constraint names, and the rest, folded into the background at their
    caps. A range_ratio of 0 keeps every active CR.
    """
    background = scenario.noise_floor + scenario.pu_floor(cr_id)
    interferers = []
    for other in active:
        if other == cr_id:
            continue
        gain = scenario.gain(cr_id, other)
        cap = float(caps[other])
        if interferes(gain, cap, scenario.noise_floor, range_ratio):
            interferers.append((other, gain))
        else:
            background += gain * cap
    return InterferenceScope(cr_id, interferers, background)


def sinr_constraint(cid: int, power: VarId, direct_gain: float,
                    interferers: Sequence[Tuple[VarId, float]],
                    background: float, requirement: Requirement,
                    extra_scope: Sequence[VarId] = (),
                    name: str = "") -> Constraint:
    """
    Builds a constraint sinr >= requirement(values).

    Parameters:
    - cid (int): Constraint id.
    - power (VarId): The victim's power variable.
    - direct_gain (float): The victim link gain g_ii.
    - interferers (Sequence[Tuple[VarId, float]]): Interferer power
        variables and their gains.
    - background (float): Constant noise and interference in mW.
    - requirement (Requirement): Required SINR given the assignment.
    - extra_scope (Sequence[VarId]): Further variables the requirement
        reads, such as the victim's rate.
    - name (str): Label for traces.
    """
    terms = list(interferers)

    def predicate(values: Mapping[VarId, Value]) -> bool:
        interference = sum(gain * values[var].magnitude
                           for var, gain in terms)
        ratio = direct_gain * values[power].magnitude / \
            (background + interference)
        return meets(ratio, requirement(values))

    scope = {power, *extra_scope, *(var for var, _ in terms)}
    return Constraint(cid, frozenset(scope), predicate, name)


def equal_rate_constraints(scenario: Scenario,
                           caps: Mapping[AgentId, Fraction],
                           active: Sequence[AgentId],
                           range_ratio: float) -> List[Constraint]:
    """
    One SINR constraint per active CR against its fixed threshold.
    """
    constraints = []
    for cid, cr_id in enumerate(active):
        scope = interference_scope(scenario, cr_id, caps, active, range_ratio)
        threshold = scenario.link(cr_id).sinr_threshold
        constraints.append(sinr_constraint(
            cid, VarId(cr_id, POWER), scenario.gain(cr_id, cr_id),
            [(VarId(other, POWER), gain) for other, gain in scope.interferers],
            scope.background, lambda values, t=threshold: t,
            name=f"sinr CR{cr_id}"))
    return constraints


def unequal_rate_constraints(scenario: Scenario,
                             caps: Mapping[AgentId, Fraction],
                             active: Sequence[AgentId],
                             range_ratio: float) -> List[Constraint]:
    """
    Per active CR, an intra-agent constraint tying the rate to the SINR the
    power supports against the background, and, when in-range interferers
    exist, an inter-agent SINR constraint including them.
    """
    constraints: List[Constraint] = []
    for cr_id in active:
        link = scenario.link(cr_id)
        scope = interference_scope(scenario, cr_id, caps, active, range_ratio)
        power, rate = VarId(cr_id, POWER), VarId(cr_id, RATE)

        def requirement(values: Mapping[VarId, Value], link=link,
                        rate=rate) -> float:
            return rate_sinr_requirement(values[rate].magnitude, link)

        direct = scenario.gain(cr_id, cr_id)
        constraints.append(sinr_constraint(
            len(constraints), power, direct, [], scope.background,
            requirement, extra_scope=(rate,), name=f"rate CR{cr_id}"))
        if scope.interferers:
            constraints.append(sinr_constraint(
                len(constraints), power, direct,
                [(VarId(other, POWER), gain)
                 for other, gain in scope.interferers],
                scope.background, requirement, extra_scope=(rate,),
                name=f"sinr CR{cr_id}"))
    return constraints


def _constraints_for(owner: AgentId,
                     constraints: Sequence[Constraint]) -> List[Constraint]:
    return [c for c in constraints
            if any(var.owner == owner for var in c.scope)]


def phase2_cdma_equal(scenario: Scenario, caps: Mapping[AgentId, Fraction],
                      mailer: Mailer,
                      params: SimulationParams = SimulationParams(),
                      range_ratio: float = 0.0,
                      verbose: bool = False) -> CdmaResult:
    """
    Equal-rate power allocation with single-variable AWCS.

    Parameters:
    - scenario (Scenario): The deployment.
    - caps (Mapping[AgentId, Fraction]): Negotiated caps; CRs capped at
        0 mW are silenced and take no part.
    - mailer (Mailer): The transport of this protocol run.
    - params (SimulationParams): Cycle cap and nogood learning.
    - range_ratio (float): Interference-range ratio. At 0 every active CR
        stays in each SINR constraint; above 0, weak interferers are
        folded into the background at their caps, which is stricter than
        the exact SINR and may reject a satisfiable instance.
    - verbose (bool): Log decisions at INFO.

    Returns:
    - CdmaResult: Powers of the active CRs, or the failing outcome.
    """
    active = [cr for cr in scenario.cr_ids if caps[cr] > 0]
    if not active:
        return CdmaResult(RunOutcome.SOLVED)

    constraints = equal_rate_constraints(scenario, caps, active, range_ratio)
    agents = [AwcsAgent(cr, capped_power_domain(scenario, cr, caps[cr]),
                        _constraints_for(cr, constraints),
                        learn_nogoods=params.learn_nogoods, verbose=verbose)
              for cr in active]
    simulation = Simulation(mailer, agents, verbose=verbose)
    outcome = simulation.run(params.max_cycles)
    if outcome is not RunOutcome.SOLVED:
        return CdmaResult(outcome)

    values = simulation.assignments()
    powers = {cr: values[VarId(cr, POWER)].scalar for cr in active}
    return CdmaResult(outcome, powers)


def phase2_cdma_unequal(scenario: Scenario,
                        caps: Mapping[AgentId, Fraction], mailer: Mailer,
                        params: SimulationParams = SimulationParams(),
                        range_ratio: float = 0.0,
                        verbose: bool = False) -> CdmaResult:
    """
    Joint power and rate allocation with multi-variable AWCS. Both
    domains are descending, which favours high rates and so a high
    proportional-fairness objective.

    Parameters and return value as for phase2_cdma_equal; the result also
    carries the rates.
    """
    active = [cr for cr in scenario.cr_ids if caps[cr] > 0]
    if not active:
        return CdmaResult(RunOutcome.SOLVED)

    constraints = unequal_rate_constraints(scenario, caps, active,
                                           range_ratio)
    agents = []
    for cr in active:
        link = scenario.link(cr)
        domains = [capped_power_domain(scenario, cr, caps[cr]),
                   rate_domain(link.rate_min, link.rate_max, link.rate_step)]
        agents.append(MultiAwcsAgent(
            cr, domains, _constraints_for(cr, constraints),
            learn_nogoods=params.learn_nogoods, verbose=verbose))
    simulation = Simulation(mailer, agents, verbose=verbose)
    outcome = simulation.run(params.max_cycles)
    if outcome is not RunOutcome.SOLVED:
        return CdmaResult(outcome)

    values = simulation.assignments()
    powers = {cr: values[VarId(cr, POWER)].scalar for cr in active}
    rates = {cr: int(values[VarId(cr, RATE)].scalar) for cr in active}
    return CdmaResult(outcome, powers, rates)
