from fractions import Fraction

import numpy as np
import pytest

from cognitiveqos.classes.dcsp import (AgentView, Assignment, CheckCounter,
                                       Constraint, Domain, Nogood, Unit,
                                       Value, VarId, Verdict, scope_index,
                                       to_fraction)
from cognitiveqos.helpers.consistency import (consistent_values, evaluate,
                                              is_higher, min_conflict_value,
                                              priority_order, satisfies_all)
from cognitiveqos.helpers.oracle import not_equal

X0, X1, X2 = VarId(0), VarId(1), VarId(2)


def v(x):
    return Value(Fraction(x))


def test_to_fraction_uses_shortest_repr():
    assert to_fraction(0.1) == Fraction(1, 10)
    assert to_fraction("2.5") == Fraction(5, 2)
    assert to_fraction(3) == Fraction(3)


def test_value_units_and_ordering():
    assert Value.mw(2) < Value.mw(3)
    assert str(Value.mw(Fraction(1, 2))) == "1/2 mW"
    assert str(Value.bps(64000)) == "64000 bit/s"
    with pytest.raises(ValueError):
        Value.mw(1) < Value.bps(1)


def test_domain_is_descending_and_single_unit():
    domain = Domain.of([1, 3, 2], Unit.MILLIWATT)
    assert [value.scalar for value in domain] == [3, 2, 1]
    assert domain.first() == Value.mw(3)
    with pytest.raises(ValueError):
        Domain((v(1), v(2)))
    with pytest.raises(ValueError):
        Domain((Value.mw(2), Value.bps(1)))
    with pytest.raises(ValueError):
        Domain(())


def test_domain_truncated_at_cap():
    domain = Domain.of([100, 98, 96, 0], Unit.MILLIWATT)
    capped = domain.truncated(Value.mw(97))
    assert [value.scalar for value in capped] == [96, 0]


def test_agent_view_never_lowers_priority():
    view = AgentView()
    assert view.update(Assignment(X1, v(1), 3))
    assert view.update(Assignment(X1, v(0), 1))
    assert view.get(X1).value == v(0)
    assert view.priority_of(X1) == 3
    assert not view.update(Assignment(X1, v(0), 2))
    assert view.max_priority() == 3


def test_nogood_identity_ignores_priorities():
    a = Nogood([Assignment(X0, v(1), 0), Assignment(X1, v(0), 2)])
    b = Nogood([Assignment(X1, v(0), 5), Assignment(X0, v(1), 1)])
    assert a == b
    assert hash(a) == hash(b)
    assert a.owners() == frozenset({0, 1})
    assert Nogood().is_empty()
    with pytest.raises(ValueError):
        Nogood([Assignment(X0, v(1)), Assignment(X0, v(0))])


def test_constraint_from_nogood_is_violated_on_the_recorded_values():
    nogood = Nogood([Assignment(X0, v(1)), Assignment(X1, v(0))])
    constraint = Constraint.from_nogood(nogood)
    assert evaluate(constraint, {X0: v(1), X1: v(0)}) is Verdict.VIOLATED
    assert evaluate(constraint, {X0: v(1), X1: v(1)}) is Verdict.SATISFIED
    assert evaluate(constraint, {X0: v(1)}) is Verdict.UNDETERMINED


def test_evaluate_counts_only_complete_checks():
    counter = CheckCounter()
    constraint = not_equal(0, X0, X1)
    evaluate(constraint, {X0: v(1)}, counter)
    assert counter.count == 0
    evaluate(constraint, {X0: v(1), X1: v(1)}, counter)
    assert counter.count == 1


def test_consistent_values_keep_domain_order():
    domain = Domain.of([0, 1, 2])
    constraints = [not_equal(0, X0, X1), not_equal(1, X0, X2)]
    values = consistent_values(domain, X0, {X1: v(2), X2: v(0)},
                               constraints)
    assert values == [v(1)]
    assert consistent_values(domain, X0, {X1: v(2)}, constraints) == \
        [v(1), v(0)]


def test_min_conflict_prefers_fewest_violations_then_first():
    lower = [not_equal(0, X0, X1), not_equal(1, X0, X2)]
    view = {X1: v(2), X2: v(2)}
    assert min_conflict_value([v(2), v(1), v(0)], X0, view, lower) == v(1)
    assert min_conflict_value([v(2), v(1)], X0, {}, lower) == v(2)
    with pytest.raises(ValueError):
        min_conflict_value([], X0, view, lower)


def test_priority_order_breaks_ties_by_agent_id():
    assert is_higher((1, X2), (0, X0))
    assert is_higher((0, X0), (0, X1))
    assert priority_order((0, VarId(1, 0)), (0, VarId(1, 1))) == -1
    assert priority_order((2, X1), (2, X1)) == 0


@pytest.mark.parametrize("seed", range(5))
def test_priority_order_is_a_strict_total_order(seed):
    rng = np.random.default_rng(seed)

    def draw():
        return (int(rng.integers(0, 3)),
                VarId(int(rng.integers(0, 3)), int(rng.integers(0, 2))))

    for _ in range(200):
        a, b, c = draw(), draw(), draw()
        assert priority_order(a, a) == 0
        assert priority_order(a, b) == -priority_order(b, a)
        assert (priority_order(a, b) == 0) == (a == b)
        if priority_order(a, b) < 0 and priority_order(b, c) < 0:
            assert priority_order(a, c) < 0
        assert is_higher(a, b) != is_higher(b, a) or a == b


def test_satisfies_all_requires_complete_assignment():
    constraints = [not_equal(0, X0, X1)]
    assert satisfies_all(constraints, {X0: v(0), X1: v(1)})
    assert not satisfies_all(constraints, {X0: v(0)})


def test_scope_index_groups_by_variable():
    c0, c1 = not_equal(0, X0, X1), not_equal(1, X1, X2)
    index = scope_index([c0, c1])
    assert index[X1] == [c0, c1]
    assert index[X0] == [c0]
