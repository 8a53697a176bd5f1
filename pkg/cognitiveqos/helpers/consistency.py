"""
Consistency helpers
Date of Creation: 2026-10-17
Description: Constraint evaluation, consistent-value filtering, the
             min-conflict heuristic and the priority order shared by the
             single- and multi-variable AWCS agents.
"""

from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from ..classes.dcsp import (AgentView, CheckCounter, Constraint,
                            PriorityValue, Value, VarId, Verdict)

ViewLike = Union[AgentView, Mapping[VarId, Value]]
PriorityKey = Tuple[int, int, int]


def _as_mapping(view: ViewLike) -> Mapping[VarId, Value]:
    if isinstance(view, AgentView):
        return view.values()
    return view


def evaluate(constraint: Constraint, view: ViewLike,
             counter: Optional[CheckCounter] = None) -> Verdict:
    """
    Evaluates a constraint against a (partial) assignment.

    Parameters:
    - constraint (Constraint): The constraint to evaluate.
    - view (ViewLike): An agent view or a plain variable-to-value mapping.
    - counter (Optional[CheckCounter]): Incremented by one when the whole
        scope is assigned and the predicate actually runs.

    Returns:
    - Verdict: UNDETERMINED if some scope variable is unassigned,
        otherwise SATISFIED or VIOLATED.
    """
    values = _as_mapping(view)
    if any(var not in values for var in constraint.scope):
        return Verdict.UNDETERMINED
    if counter is not None:
        counter.increment()
    if constraint.predicate(values):
        return Verdict.SATISFIED
    return Verdict.VIOLATED


def is_violated(constraint: Constraint, view: ViewLike,
                counter: Optional[CheckCounter] = None) -> bool:
    return evaluate(constraint, view, counter) is Verdict.VIOLATED


def consistent_values(domain: Iterable[Value], var: VarId, view: ViewLike,
                      constraints: Sequence[Constraint],
                      counter: Optional[CheckCounter] = None) -> List[Value]:
    """
    Returns every value of a domain that violates none of the constraints.

    Undetermined constraints never block a value. The result keeps the
    domain order.

    Parameters:
    - domain (Iterable[Value]): Candidate values in preference order.
    - var (VarId): The variable being assigned.
    - view (ViewLike): Known assignments of the other variables.
    - constraints (Sequence[Constraint]): Constraints that mention var.
    - counter (Optional[CheckCounter]): Check counter to charge.

    Returns:
    - List[Value]: The consistent values, in domain order.
    """
    trial = dict(_as_mapping(view))
    result = []
    for value in domain:
        trial[var] = value
        if not any(is_violated(c, trial, counter) for c in constraints):
            result.append(value)
    return result


def count_violations(var: VarId, value: Value, view: ViewLike,
                     constraints: Sequence[Constraint],
                     counter: Optional[CheckCounter] = None) -> int:
    """
    Counts the constraints violated when var takes value.
    """
    trial = dict(_as_mapping(view))
    trial[var] = value
    return sum(1 for c in constraints if is_violated(c, trial, counter))


def min_conflict_value(candidates: Sequence[Value], var: VarId,
                       view: ViewLike,
                       lower_priority_constraints: Sequence[Constraint],
                       counter: Optional[CheckCounter] = None) -> Value:
    """
    Picks the candidate violating the fewest lower-priority constraints.

    Ties go to the earliest candidate, i.e. the first in domain order.

    Parameters:
    - candidates (Sequence[Value]): Non-empty list of candidate values.
    - var (VarId): The variable being assigned.
    - view (ViewLike): Known assignments of the other variables.
    - lower_priority_constraints (Sequence[Constraint]): Constraints
        shared with lower-priority variables.
    - counter (Optional[CheckCounter]): Check counter to charge.

    Returns:
    - Value: The selected candidate.

    Raises:
    - ValueError: If there are no candidates.
    """
    if not candidates:
        raise ValueError("min_conflict_value needs at least one candidate.")
    if len(candidates) == 1 or not lower_priority_constraints:
        return candidates[0]

    best, best_count = candidates[0], None
    for value in candidates:
        violations = count_violations(var, value, view,
                                      lower_priority_constraints, counter)
        if best_count is None or violations < best_count:
            best, best_count = value, violations
        if best_count == 0:
            break
    return best


def priority_key(priority: PriorityValue, var: VarId) -> PriorityKey:
    """
    Sort key for the priority order: smaller key means higher priority.

    A larger priority value wins; equal values fall back to the lower
    agent id, then the lower local index.
    """
    return (-priority, var.owner, var.local_index)


def priority_order(a: Tuple[PriorityValue, VarId],
                   b: Tuple[PriorityValue, VarId]) -> int:
    """
    Compares two (priority, variable) pairs.

    Returns:
    - int: -1 if a has the higher priority, 1 if b has, 0 if identical.
    """
    key_a, key_b = priority_key(*a), priority_key(*b)
    if key_a < key_b:
        return -1
    if key_a > key_b:
        return 1
    return 0


def is_higher(a: Tuple[PriorityValue, VarId],
              b: Tuple[PriorityValue, VarId]) -> bool:
    return priority_order(a, b) < 0


def satisfies_all(constraints: Iterable[Constraint],
                  values: Mapping[VarId, Value]) -> bool:
    """
    Checks a complete assignment against every constraint.

    Unassigned scope members count as a failure here, since the caller
    claims the assignment is complete.
    """
    return all(evaluate(c, values) is Verdict.SATISFIED for c in constraints)
