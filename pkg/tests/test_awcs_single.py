from fractions import Fraction

import numpy as np
import pytest

from cognitiveqos.algorithms.awcs_single import AwcsAgent
from cognitiveqos.algorithms.simulation import RunOutcome
from cognitiveqos.classes.dcsp import (Assignment, Constraint, Domain, Nogood,
                                       Value, VarId)
from cognitiveqos.classes.mailer import Mailer
from cognitiveqos.classes.messages import NogoodMsg, NoSolution, Ok
from cognitiveqos.helpers.consistency import satisfies_all
from cognitiveqos.helpers.oracle import (TOY_INSTANCES, brute_force,
                                         coloring_instance, not_equal,
                                         random_single_instance,
                                         solve_instance)

X0, X1, X2 = VarId(0), VarId(1), VarId(2)


def v(x):
    return Value(Fraction(x))


@pytest.fixture
def agent():
    # Agent 2 must differ from agents 0 and 1, with colours {1, 0}.
    return AwcsAgent(2, Domain.of([1, 0]),
                     [not_equal(0, X0, X2), not_equal(1, X1, X2)])


def test_neighbors_come_from_constraint_scopes(agent):
    assert agent.neighbors == {0, 1}
    assert agent.current_value == v(1)
    assert agent.current_priority == 0


def test_constraint_without_own_variable_is_rejected():
    with pytest.raises(ValueError):
        AwcsAgent(2, Domain.of([1, 0]), [not_equal(0, X0, X1)])


def test_start_announces_preferred_value(agent):
    outgoing = agent.start()
    assert [dst for dst, _ in outgoing] == [0, 1]
    assert all(message == Ok((Assignment(X2, v(1), 0),))
               for _, message in outgoing)


def test_ok_from_higher_agent_forces_a_repair(agent):
    outgoing = agent.handle_ok(Assignment(X0, v(1), 0))
    assert agent.current_value == v(0)
    assert outgoing == [(0, Ok((Assignment(X2, v(0), 0),))),
                        (1, Ok((Assignment(X2, v(0), 0),)))]


def test_dead_end_sends_nogood_and_raises_priority(agent):
    agent.handle_ok(Assignment(X0, v(1), 0))
    outgoing = agent.handle_ok(Assignment(X1, v(0), 0))

    nogood = Nogood([Assignment(X0, v(1)), Assignment(X1, v(0))])
    assert outgoing[:2] == [(0, NogoodMsg(2, nogood)),
                            (1, NogoodMsg(2, nogood))]
    assert agent.current_priority == 1
    # Both values break one constraint; the first in domain order wins.
    assert agent.current_value == v(1)
    assert outgoing[2:] == [(0, Ok((Assignment(X2, v(1), 1),))),
                            (1, Ok((Assignment(X2, v(1), 1),)))]
    assert nogood in agent.nogood_sent
    # The generated nogood never names X2, so no local copy is kept.
    assert not agent.nogood_list


def test_repeated_nogood_is_not_resent_but_still_raises_priority(agent):
    agent.handle_ok(Assignment(X0, v(1), 0))
    agent.handle_ok(Assignment(X1, v(0), 0))
    # The two neighbours now outrank the agent again at the same values.
    agent.handle_ok(Assignment(X0, v(1), 2))
    outgoing = agent.handle_ok(Assignment(X1, v(0), 2))
    assert not any(isinstance(message, NogoodMsg) for _, message in outgoing)
    assert agent.current_priority == 3
    assert agent.current_value == v(1)
    assert outgoing == [(0, Ok((Assignment(X2, v(1), 3),))),
                        (1, Ok((Assignment(X2, v(1), 3),)))]
    assert len(agent.nogood_sent) == 1


def test_lower_priority_violation_is_left_to_the_other_agent():
    lowly = AwcsAgent(0, Domain.of([1, 0]), [not_equal(0, X0, X1)])
    assert lowly.handle_ok(Assignment(X1, v(1), 0)) == []
    assert lowly.current_value == v(1)


def test_empty_nogood_broadcasts_no_solution():
    # A unary constraint no value satisfies.
    never = Constraint(0, frozenset({X0}), lambda values: False)
    lonely = AwcsAgent(0, Domain.of([1, 0]), [never])
    assert lonely.start() == [(None, NoSolution())]
    assert lonely.no_solution and lonely.halted


def test_nogood_from_unknown_agent_links_it(agent):
    nogood = Nogood([Assignment(X2, v(1)), Assignment(VarId(5), v(0))])
    outgoing = agent.handle_nogood(5, nogood)
    assert 5 in agent.neighbors
    assert agent.nogood_list == {nogood}
    assert outgoing == [(5, Ok((Assignment(X2, v(1), 0),)))]


def test_no_solution_halts_the_agent(agent):
    assert agent.receive([NoSolution()]) == []
    assert agent.halted
    assert agent.handle_ok(Assignment(X0, v(1), 0)) == []


def test_pair_reaches_a_proper_colouring():
    instance = TOY_INSTANCES["pair"]()
    outcome, solution = solve_instance(instance)
    assert outcome is RunOutcome.SOLVED
    assert solution[X0] != solution[X1]


def test_odd_cycle_with_two_colours_has_no_solution():
    outcome, _ = solve_instance(TOY_INSTANCES["triangle"]())
    assert outcome is RunOutcome.NO_SOLUTION


@pytest.mark.parametrize("delay_max", [0, 3])
def test_path_colouring_converges(delay_max):
    edges = [(0, 1), (1, 2), (2, 3), (3, 4)]
    instance = coloring_instance(5, 2, edges)
    outcome, solution = solve_instance(instance, seed=11,
                                       delay_max=delay_max)
    assert outcome is RunOutcome.SOLVED
    assert satisfies_all(instance.constraints, solution)


def test_without_learning_a_repeated_nogood_is_sent_again():
    forgetful = AwcsAgent(2, Domain.of([1, 0]),
                          [not_equal(0, X0, X2), not_equal(1, X1, X2)],
                          learn_nogoods=False)
    forgetful.handle_ok(Assignment(X0, v(1), 0))
    forgetful.handle_ok(Assignment(X1, v(0), 0))
    forgetful.handle_ok(Assignment(X0, v(1), 2))
    outgoing = forgetful.handle_ok(Assignment(X1, v(0), 2))

    nogood = Nogood([Assignment(X0, v(1)), Assignment(X1, v(0))])
    assert outgoing[:2] == [(0, NogoodMsg(2, nogood)),
                            (1, NogoodMsg(2, nogood))]
    assert forgetful.current_priority == 3
    assert not forgetful.nogood_sent


def unsatisfiable_instances(count, attempts=5000):
    """
    Tight random instances that enumeration proves unsatisfiable.
    """
    found = []
    for index in range(attempts):
        instance = random_single_instance(np.random.default_rng([23, index]),
                                          values=(2, 3), density=0.9,
                                          tightness=0.6)
        if brute_force(instance.domains, instance.constraints) is None:
            found.append(instance)
            if len(found) == count:
                return found
    raise AssertionError(f"only {len(found)} unsatisfiable instances")


@pytest.mark.slow
def test_nogood_learning_never_needs_more_cycles():
    learning, forgetful = [], []
    for instance in unsatisfiable_instances(50):
        for target, learn in ((learning, True), (forgetful, False)):
            mailer = Mailer()
            solve_instance(instance, learn_nogoods=learn, max_cycles=2000,
                           mailer=mailer)
            target.append(mailer.metrics.cycles)
    assert np.median(learning) <= np.median(forgetful)
