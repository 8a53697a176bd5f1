"""
Brute-force oracles
Date of Creation: 2026-10-17
Description: Exhaustive enumeration of small DCSP instances, random
             instance generators and the cross-check of AWCS outcomes
             against enumeration. Used by the tests and by the validate
             command.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..algorithms.awcs_multi import MultiAwcsAgent
from ..algorithms.awcs_single import AwcsAgent
from ..algorithms.cdma import (POWER, RATE, capped_power_domain,
                               equal_rate_constraints,
                               unequal_rate_constraints)
from ..algorithms.simulation import RunOutcome, Simulation
from ..classes.agent import Agent
from ..classes.dcsp import AgentId, Constraint, Domain, Value, VarId
from ..classes.mailer import DelayKind, DelayPolicy, Mailer
from ..classes.scenario import Scenario
from .consistency import satisfies_all
from .radio import SINR_TOLERANCE, rate_domain

logger = logging.getLogger(__name__)

Solution = Dict[VarId, Value]


@dataclass
class DcspInstance:
    """
    A small DCSP.

    Attributes:
    - domains (Dict[VarId, Domain]): Every variable with its domain.
    - constraints (List[Constraint]): The constraints.
    - multi (bool): Whether agents own several variables.
    """
    domains: Dict[VarId, Domain]
    constraints: List[Constraint]
    multi: bool = False

    def owners(self) -> List[AgentId]:
        return sorted({var.owner for var in self.domains})

    def variables_of(self, owner: AgentId) -> List[VarId]:
        return sorted(var for var in self.domains if var.owner == owner)


def brute_force(domains: Mapping[VarId, Domain],
                constraints: Sequence[Constraint]) -> Optional[Solution]:
    """
    Enumerates the cross product of the domains.

    Returns:
    - Optional[Solution]: The first satisfying assignment in domain order,
        None if there is none.
    """
    variables = sorted(domains)
    for values in itertools.product(*(domains[var] for var in variables)):
        candidate = dict(zip(variables, values))
        if satisfies_all(constraints, candidate):
            return candidate
    return None


def all_solutions(domains: Mapping[VarId, Domain],
                  constraints: Sequence[Constraint]) -> List[Solution]:
    variables = sorted(domains)
    solutions = []
    for values in itertools.product(*(domains[var] for var in variables)):
        candidate = dict(zip(variables, values))
        if satisfies_all(constraints, candidate):
            solutions.append(candidate)
    return solutions


def _forbidding(cid: int, a: VarId, b: VarId,
                forbidden: Sequence[Tuple[Fraction, Fraction]]) -> Constraint:
    pairs = frozenset(forbidden)

    def predicate(values: Mapping[VarId, Value]) -> bool:
        return (values[a].scalar, values[b].scalar) not in pairs

    return Constraint(cid, frozenset({a, b}), predicate,
                      name=f"{a}-{b} forbids {len(pairs)}")


def _random_pair_constraint(rng: np.random.Generator, cid: int, a: VarId,
                            b: VarId, domains: Mapping[VarId, Domain],
                            tightness: float) -> Constraint:
    forbidden = [(x.scalar, y.scalar)
                 for x in domains[a] for y in domains[b]
                 if rng.random() < tightness]
    return _forbidding(cid, a, b, forbidden)


def random_single_instance(rng: np.random.Generator,
                           agents: Tuple[int, int] = (3, 6),
                           values: Tuple[int, int] = (2, 5),
                           density: float = 0.6,
                           tightness: float = 0.35) -> DcspInstance:
    """
    A random binary DCSP with one variable per agent.

    Parameters:
    - rng (np.random.Generator): Randomness source.
    - agents (Tuple[int, int]): Inclusive range of the agent count.
    - values (Tuple[int, int]): Inclusive range of the domain sizes.
    - density (float): Probability that a pair of agents is constrained.
    - tightness (float): Probability that a value pair is forbidden.
    """
    n = int(rng.integers(agents[0], agents[1] + 1))
    domains = {VarId(i, 0): Domain.of(
        range(int(rng.integers(values[0], values[1] + 1))))
        for i in range(n)}
    constraints = []
    for a, b in itertools.combinations(sorted(domains), 2):
        if rng.random() < density:
            constraints.append(_random_pair_constraint(
                rng, len(constraints), a, b, domains, tightness))
    return DcspInstance(domains, constraints)


def random_multi_instance(rng: np.random.Generator,
                          agents: Tuple[int, int] = (2, 4),
                          locals_per_agent: int = 2,
                          values: Tuple[int, int] = (2, 4),
                          density: float = 0.5,
                          tightness: float = 0.35) -> DcspInstance:
    """
    A random binary DCSP where every agent owns several variables; pairs of
    variables inside an agent and across agents are constrained alike.
    """
    n = int(rng.integers(agents[0], agents[1] + 1))
    domains = {VarId(i, j): Domain.of(
        range(int(rng.integers(values[0], values[1] + 1))))
        for i in range(n) for j in range(locals_per_agent)}
    constraints = []
    for a, b in itertools.combinations(sorted(domains), 2):
        if rng.random() < density:
            constraints.append(_random_pair_constraint(
                rng, len(constraints), a, b, domains, tightness))
    return DcspInstance(domains, constraints, multi=True)


def split_instance(instance: DcspInstance) -> DcspInstance:
    """
    The same problem with every variable owned by its own single-variable
    agent, numbered in variable order.
    """
    renamed = {var: VarId(k) for k, var in enumerate(sorted(instance.domains))}

    def rename(constraint: Constraint) -> Constraint:
        back = {renamed[var]: var for var in constraint.scope}

        def predicate(values: Mapping[VarId, Value]) -> bool:
            return constraint.predicate(
                {old: values[new] for new, old in back.items()})

        return Constraint(constraint.cid, frozenset(back), predicate,
                          name=constraint.name)

    return DcspInstance(
        {renamed[var]: domain for var, domain in instance.domains.items()},
        [rename(constraint) for constraint in instance.constraints])


INSTANCE_KINDS: Dict[str, Callable[[np.random.Generator], DcspInstance]] = {
    "single": random_single_instance,
    "multi": random_multi_instance,
}


def build_agents(instance: DcspInstance,
                 learn_nogoods: bool = True) -> List[Agent]:
    """
    One AWCS agent per owner, each holding the constraints on its
    variables.
    """
    agents: List[Agent] = []
    for owner in instance.owners():
        variables = instance.variables_of(owner)
        mine = [c for c in instance.constraints
                if any(var in c.scope for var in variables)]
        if instance.multi:
            agents.append(MultiAwcsAgent(
                owner, [instance.domains[var] for var in variables], mine,
                learn_nogoods=learn_nogoods))
        else:
            agents.append(AwcsAgent(owner, instance.domains[variables[0]],
                                    mine, learn_nogoods=learn_nogoods))
    return agents


def solve_instance(instance: DcspInstance, seed: int = 0,
                   delay_max: int = 0, learn_nogoods: bool = True,
                   max_cycles: int = 20000,
                   mailer: Optional[Mailer] = None) -> \
        Tuple[RunOutcome, Solution]:
    """
    Runs AWCS on an instance.

    Returns:
    - Tuple[RunOutcome, Solution]: The outcome and the final assignment.
    """
    mailer = mailer or Mailer(
        DelayPolicy.from_max(DelayKind.UNIFORM, delay_max), seed)
    simulation = Simulation(mailer, build_agents(instance, learn_nogoods))
    outcome = simulation.run(max_cycles)
    return outcome, simulation.assignments()


Solver = Callable[[DcspInstance, int, int], Tuple[RunOutcome, Solution]]


@dataclass(frozen=True)
class OracleCase:
    """
    One cross-check of AWCS against enumeration.
    """
    index: int
    kind: str
    seed: int
    satisfiable: bool
    outcome: RunOutcome
    passed: bool

    @property
    def detail(self) -> str:
        expected = "sat" if self.satisfiable else "unsat"
        return f"{self.kind} #{self.index}: oracle {expected}, " \
            f"awcs {self.outcome.value}"


def check_instance(instance: DcspInstance, outcome: RunOutcome,
                   solution: Solution) -> Tuple[bool, bool]:
    """
    Compares an AWCS run with enumeration.

    Returns:
    - Tuple[bool, bool]: Whether the instance is satisfiable and whether
        AWCS agreed: a satisfying assignment when one exists, NoSolution
        otherwise.
    """
    satisfiable = brute_force(instance.domains,
                              instance.constraints) is not None
    if satisfiable:
        agreed = outcome is RunOutcome.SOLVED and \
            satisfies_all(instance.constraints, solution)
    else:
        agreed = outcome is RunOutcome.NO_SOLUTION
    return satisfiable, agreed


def seeded_instance(kind: str, seed: int, index: int) -> \
        Tuple[DcspInstance, int]:
    """
    Rebuilds instance number index of a validation run, with the seed of
    its AWCS run.

    Parameters:
    - kind (str): "single" or "multi".
    - seed (int): Base seed of the validation run.
    - index (int): Instance number within its kind.

    Raises:
    - ValueError: If the kind is unknown.
    """
    if kind not in INSTANCE_KINDS:
        raise ValueError(f"Unknown instance kind {kind!r}.")
    sequence = np.random.SeedSequence(
        [seed, 0 if kind == "single" else 1, index])
    run_seed = int(sequence.generate_state(1)[0])
    return INSTANCE_KINDS[kind](np.random.default_rng(sequence)), run_seed


def validate(n: int = 200, n_multi: int = 100, seed: int = 0,
             delay_max: int = 0, solver: Optional[Solver] = None) -> \
        List[OracleCase]:
    """
    Cross-checks AWCS on seeded random instances: n single-variable ones
    with 3 to 6 agents and 2 to 5 values, n_multi multi-variable ones with
    2 to 4 agents of 2 variables with 2 to 4 values.

    Parameters:
    - n (int): Number of single-variable instances.
    - n_multi (int): Number of multi-variable instances.
    - seed (int): Base seed.
    - delay_max (int): Maximum uniform message delay.
    - solver (Optional[Solver]): Replaces solve_instance, for negative
        controls.

    Returns:
    - List[OracleCase]: One case per instance.
    """
    if n < 0 or n_multi < 0:
        raise ValueError(f"Instance counts must be non-negative, got {n}, {n_multi}.")  # noqa
    solver = solver or (lambda instance, run_seed, delay: solve_instance(
        instance, run_seed, delay))

    cases = []
    plan = [("single", i) for i in range(n)] + \
        [("multi", i) for i in range(n_multi)]
    for kind, index in plan:
        instance, run_seed = seeded_instance(kind, seed, index)
        outcome, solution = solver(instance, run_seed, delay_max)
        satisfiable, passed = check_instance(instance, outcome, solution)
        case = OracleCase(index, kind, run_seed, satisfiable, outcome, passed)
        if not passed:
            logger.warning("oracle mismatch: %s", case.detail)
        cases.append(case)
    return cases


def cdma_instance(scenario: Scenario, caps: Mapping[AgentId, Fraction],
                  range_ratio: float = 0.0,
                  unequal: bool = False) -> DcspInstance:
    """
    The DCSP a CDMA allocation solves, for enumeration over the power (and
    rate) grids of the active CRs.
    """
    active = [cr for cr in scenario.cr_ids if caps[cr] > 0]
    domains: Dict[VarId, Domain] = {}
    for cr in active:
        domains[VarId(cr, POWER)] = capped_power_domain(scenario, cr,
                                                        caps[cr])
        if unequal:
            link = scenario.link(cr)
            domains[VarId(cr, RATE)] = rate_domain(
                link.rate_min, link.rate_max, link.rate_step)
    build = unequal_rate_constraints if unequal else equal_rate_constraints
    return DcspInstance(domains, build(scenario, caps, active, range_ratio),
                        multi=unequal)


def sinr_grid_solution(scenario: Scenario,
                       caps: Mapping[AgentId, Fraction]) -> \
        Optional[Dict[AgentId, Fraction]]:
    """
    Searches the capped power grids of the active CRs for a vector whose
    exact SINR meets every equal-rate threshold. Silenced CRs transmit
    nothing. The grid is enumerated at once, so this only suits a handful
    of CRs.

    Parameters:
    - scenario (Scenario): The deployment.
    - caps (Mapping[AgentId, Fraction]): Negotiated caps.

    Returns:
    - Optional[Dict[AgentId, Fraction]]: The first satisfying vector in
        descending grid order, or None if the grid has none.
    """
    active = [cr for cr in scenario.cr_ids if caps[cr] > 0]
    if not active:
        return {}
    levels = [[v.scalar for v in capped_power_domain(scenario, cr, caps[cr])]
              for cr in active]
    grid = np.array(np.meshgrid(*[np.array(level, dtype=float)
                                  for level in levels], indexing="ij"))
    vectors = grid.reshape(len(active), -1).T

    rows = [scenario.index_of(cr) for cr in active]
    gains = scenario.gains.cr_to_cr[np.ix_(rows, rows)]
    signal = vectors * np.diag(gains)
    received = vectors @ gains.T
    background = scenario.noise_floor + scenario.gains.pu_floor[rows]
    ratios = signal / (background + received - signal)
    required = np.array([scenario.link(cr).sinr_threshold for cr in active])
    feasible = np.all(ratios >= required * (1 - SINR_TOLERANCE), axis=1)
    if not feasible.any():
        return None
    first = np.unravel_index(int(np.argmax(feasible)), grid.shape[1:])
    return {cr: levels[k][first[k]] for k, cr in enumerate(active)}


def not_equal(cid: int, a: VarId, b: VarId) -> Constraint:
    return Constraint(cid, frozenset({a, b}),
                      lambda values: values[a] != values[b],
                      name=f"{a} != {b}")


def coloring_instance(n_agents: int, colors: int,
                      edges: Sequence[Tuple[AgentId, AgentId]]) -> \
        DcspInstance:
    """
    Graph colouring with one agent per node and not-equal constraints on
    the edges.
    """
    domains = {VarId(i, 0): Domain.of(range(colors))
               for i in range(n_agents)}
    constraints = [not_equal(cid, VarId(a, 0), VarId(b, 0))
                   for cid, (a, b) in enumerate(edges)]
    return DcspInstance(domains, constraints)


TOY_INSTANCES: Dict[str, Callable[[], DcspInstance]] = {
    "pair": lambda: coloring_instance(2, 2, [(0, 1)]),
    "triangle": lambda: coloring_instance(3, 2, [(0, 1), (1, 2), (0, 2)]),
}
