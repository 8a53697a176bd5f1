from fractions import Fraction

import pytest

from cognitiveqos.algorithms.pu_negotiation import (CrNegotiator, PuMonitor,
                                                    phase1_pu_negotiation)
from cognitiveqos.algorithms.simulation import RunOutcome
from cognitiveqos.classes.dcsp import Assignment, Value, VarId
from cognitiveqos.classes.mailer import DelayKind, DelayPolicy, Mailer
from cognitiveqos.classes.messages import MessageKind, Ok, PuViolation
from cognitiveqos.helpers.radio import power_domain, pu_safe
from cognitiveqos.helpers.scenario_io import generate_scenario


@pytest.fixture
def single_cr(make_scenario):
    def build(cap):
        return make_scenario([[1.0]], [5.0], cr_to_pu=[[0.001]], caps=[cap])
    return build


def test_single_cr_steps_down_to_the_largest_safe_level(single_cr):
    scenario = single_cr(0.05)
    result = phase1_pu_negotiation(scenario, Mailer())
    assert result.outcome is RunOutcome.SOLVED
    assert result.caps == {1: Fraction(50)}
    assert result.steps == {1: 25}
    assert result.reported[1][0] == 100
    assert pu_safe(result.caps, scenario)


def test_generous_cap_sends_no_violation(single_cr):
    mailer = Mailer()
    result = phase1_pu_negotiation(single_cr(10.0), mailer)
    assert result.caps == {1: Fraction(100)}
    assert mailer.metrics.messages(MessageKind.PU_VIOLATION) == 0
    assert mailer.metrics.messages(MessageKind.OK) == 1


def test_tiny_cap_silences_the_cr(single_cr):
    result = phase1_pu_negotiation(single_cr(1e-12), Mailer())
    assert result.caps == {1: Fraction(0)}
    assert result.silenced == [1]
    assert result.steps == {1: 50}


def test_only_crs_above_the_fair_share_are_signalled(make_scenario):
    scenario = make_scenario([[1.0, 0.1], [0.1, 1.0]], [5.0, 5.0],
                             cr_to_pu=[[0.001, 0.0001]], caps=[0.051])
    result = phase1_pu_negotiation(scenario, Mailer())
    assert result.caps == {1: Fraction(40), 2: Fraction(100)}
    assert result.steps[2] == 0


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_delays_do_not_change_the_fixpoint(make_scenario, seed):
    scenario = make_scenario([[1.0, 0.1], [0.1, 1.0]], [5.0, 5.0],
                             cr_to_pu=[[0.001, 0.0001]], caps=[0.051])
    result = phase1_pu_negotiation(scenario,
                                   Mailer(DelayPolicy.uniform(4), seed))
    assert result.caps == {1: Fraction(40), 2: Fraction(100)}


def test_reported_powers_never_increase(make_scenario):
    scenario = make_scenario([[1.0, 0.1], [0.1, 1.0]], [5.0, 5.0],
                             cr_to_pu=[[0.001, 0.002], [0.003, 0.0005]],
                             caps=[0.05, 0.04])
    result = phase1_pu_negotiation(scenario, Mailer())
    for cr, history in result.reported.items():
        assert all(b <= a for a, b in zip(history, history[1:]))
        assert history[-1] == result.caps[cr]
    assert pu_safe(result.caps, scenario)


def test_without_pus_every_cr_keeps_its_budget(two_cr_scenario):
    mailer = Mailer()
    result = phase1_pu_negotiation(two_cr_scenario, mailer)
    assert result.caps == {1: Fraction(100), 2: Fraction(100)}
    assert mailer.metrics.total_messages == 0


def test_negotiator_stops_at_silence(single_cr):
    negotiator = CrNegotiator(single_cr(0.05).link(1), [2])
    negotiator.level = len(negotiator.domain) - 1
    assert negotiator.receive([PuViolation(2)]) == []
    assert negotiator.silenced


def test_monitor_does_not_repeat_a_signal(single_cr):
    scenario = single_cr(0.05)
    monitor = PuMonitor(scenario.pu_links[0], 0, scenario)
    report = Ok((Assignment(VarId(1), Value.mw(100)),))
    assert monitor.receive([report]) == [(1, PuViolation(2, Fraction(100)))]
    assert monitor.receive([report]) == []
    assert not monitor.is_consistent()


def test_stale_signal_does_not_step_twice(single_cr):
    negotiator = CrNegotiator(single_cr(0.05).link(1), [2, 3])
    both = [PuViolation(2, Fraction(100)), PuViolation(3, Fraction(100))]
    assert negotiator.receive(both) != []
    assert negotiator.power == 98
    # A late copy about 100 mW answers a level the CR already left.
    assert negotiator.receive([PuViolation(3, Fraction(100))]) == []
    assert negotiator.power == 98
    assert negotiator.receive([PuViolation(3, Fraction(98))]) != []
    assert negotiator.power == 96


@pytest.mark.parametrize("seed", range(5))
def test_two_pus_signalling_one_level_cost_one_step(make_scenario, seed):
    # Both PUs tolerate 99 mW from the CR, so 98 mW is the fixpoint.
    scenario = make_scenario([[1.0]], [5.0], cr_to_pu=[[1.0], [1.0]],
                             caps=[99.0, 99.0])
    result = phase1_pu_negotiation(scenario,
                                   Mailer(DelayPolicy.uniform(4), seed))
    assert result.caps == {1: Fraction(98)}
    assert result.steps == {1: 1}
    assert pu_safe(result.caps, scenario)


@pytest.mark.parametrize("delay_max", [0, 3])
def test_generated_scenarios_stay_bounded_and_safe(delay_max):
    for seed in range(10):
        scenario = generate_scenario(seed, 7, 2)
        mailer = Mailer(DelayPolicy.from_max(DelayKind.UNIFORM, delay_max),
                        seed)
        result = phase1_pu_negotiation(scenario, mailer)
        assert result.outcome is RunOutcome.SOLVED
        assert pu_safe(result.caps, scenario)
        for link in scenario.cr_links:
            levels = len(power_domain(link.power_budget, link.power_step))
            assert result.steps[link.id] <= levels
