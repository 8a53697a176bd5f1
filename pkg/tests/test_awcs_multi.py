from fractions import Fraction

import numpy as np
import pytest

from cognitiveqos.algorithms.awcs_multi import MultiAwcsAgent
from cognitiveqos.algorithms.simulation import RunOutcome, Simulation
from cognitiveqos.classes.dcsp import Assignment, Domain, Value, VarId
from cognitiveqos.classes.mailer import DelayKind, DelayPolicy, Mailer
from cognitiveqos.classes.messages import NoSolution, Ok
from cognitiveqos.helpers.consistency import satisfies_all
from cognitiveqos.helpers.oracle import (DcspInstance, build_agents,
                                         check_instance, not_equal,
                                         random_multi_instance,
                                         seeded_instance, solve_instance,
                                         split_instance)

A0, A1 = VarId(0, 0), VarId(0, 1)
B0, B1 = VarId(1, 0), VarId(1, 1)


def v(x):
    return Value(Fraction(x))


def two_colours():
    return Domain.of([1, 0])


def test_intra_agent_conflict_is_settled_locally():
    agent = MultiAwcsAgent(0, [two_colours(), two_colours()],
                           [not_equal(0, A0, A1)])
    assert agent.intra and not agent.inter
    # No related agents, so nothing leaves the agent.
    assert agent.start() == []
    assert agent.current_assignments() == {A0: v(1), A1: v(0)}
    assert agent.is_consistent()


def test_higher_agent_ok_repairs_and_publishes_to_related_only():
    agent = MultiAwcsAgent(1, [two_colours(), two_colours()],
                           [not_equal(0, A0, B0)])
    assert agent.related == {B0: {0}, B1: set()}
    outgoing = agent.handle_ok_multi(Assignment(A0, v(1), 0))
    assert outgoing == [(0, Ok((Assignment(B0, v(0), 0),)))]


def test_unchanged_locals_are_not_published_twice():
    agent = MultiAwcsAgent(1, [two_colours(), two_colours()],
                           [not_equal(0, A0, B0)])
    agent.handle_ok_multi(Assignment(A0, v(1), 0))
    assert agent.handle_ok_multi(Assignment(A0, v(1), 0)) == []


def test_ok_from_unknown_sender_links_it():
    agent = MultiAwcsAgent(1, [two_colours(), two_colours()],
                           [not_equal(0, A0, B0)])
    outgoing = agent.handle_ok_multi(Assignment(VarId(7, 0), v(1), 0))
    assert 7 in agent.linked
    assert (7, Ok((Assignment(B0, v(1), 0), Assignment(B1, v(1), 0)))) \
        in outgoing


def test_local_repair_order_prefers_priority_then_index():
    agent = MultiAwcsAgent(3, [two_colours(), two_colours()], [])
    first, second = agent.locals
    assert agent.local_repair_order([second, first]) == first.var
    second.priority = 2
    assert agent.local_repair_order([first, second]) == second.var
    with pytest.raises(ValueError):
        agent.local_repair_order([])


def test_constraint_without_local_variable_is_rejected():
    with pytest.raises(ValueError):
        MultiAwcsAgent(1, [two_colours()], [not_equal(0, A0, A1)])


def test_no_solution_halts_the_agent():
    agent = MultiAwcsAgent(1, [two_colours()], [not_equal(0, A0, B0)])
    assert agent.receive([NoSolution()]) == []
    assert agent.halted and agent.no_solution


def test_odd_cycle_across_agents_has_no_solution():
    domains = {var: two_colours() for var in (A0, A1, B0)}
    constraints = [not_equal(0, A0, A1), not_equal(1, A1, B0),
                   not_equal(2, B0, A0)]
    instance = DcspInstance(domains, constraints, multi=True)
    outcome, _ = solve_instance(instance)
    assert outcome is RunOutcome.NO_SOLUTION


def test_even_cycle_across_agents_is_solved():
    domains = {var: two_colours() for var in (A0, A1, B0, B1)}
    constraints = [not_equal(0, A0, B0), not_equal(1, B0, A1),
                   not_equal(2, A1, B1), not_equal(3, B1, A0)]
    instance = DcspInstance(domains, constraints, multi=True)
    outcome, solution = solve_instance(instance, delay_max=2, seed=5)
    assert check_instance(instance, outcome, solution) == (True, True)


@pytest.mark.parametrize("index", range(10))
def test_random_instances_agree_with_enumeration(index):
    instance = random_multi_instance(np.random.default_rng([17, index]))
    outcome, solution = solve_instance(instance, seed=index)
    satisfiable, passed = check_instance(instance, outcome, solution)
    assert passed, (satisfiable, outcome)


def record_sends(agent, sends):
    """
    Wraps start and receive so every reply is logged with the locals the
    agent held when it left.
    """
    def wrap(method):
        def wrapped(*args):
            outgoing = method(*args)
            sends.append((agent, agent.current_assignments(), outgoing))
            return outgoing
        return wrapped

    agent.start = wrap(agent.start)
    agent.receive = wrap(agent.receive)


@pytest.mark.parametrize("delay_max", [0, 2])
def test_locals_are_consistent_whenever_an_ok_leaves(delay_max):
    for index in range(15):
        instance = random_multi_instance(np.random.default_rng([29, index]))
        agents = build_agents(instance)
        sends = []
        for agent in agents:
            record_sends(agent, sends)
        mailer = Mailer(DelayPolicy.from_max(DelayKind.UNIFORM, delay_max),
                        index)
        Simulation(mailer, agents).run(5000)
        for agent, values, outgoing in sends:
            if any(isinstance(message, Ok) for _, message in outgoing):
                assert satisfies_all(agent.intra, values), (index, values)


def test_split_instance_keeps_the_solutions():
    instance = random_multi_instance(np.random.default_rng([29, 3]))
    split = split_instance(instance)
    assert not split.multi
    assert len(split.owners()) == len(instance.domains)
    original, _ = solve_instance(instance)
    divided, _ = solve_instance(split)
    assert original is divided


@pytest.mark.slow
def test_multi_variable_agents_send_fewer_messages_than_the_split():
    together, apart = [], []
    for index in range(50):
        instance, run_seed = seeded_instance("multi", 0, index)
        for target, problem in ((together, instance),
                                (apart, split_instance(instance))):
            mailer = Mailer(seed=run_seed)
            solve_instance(problem, mailer=mailer)
            target.append(mailer.metrics.total_messages)
    assert np.median(together) <= np.median(apart)
