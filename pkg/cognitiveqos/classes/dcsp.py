"""
DCSP value types
Date of Creation: 2026-10-17
Description: Variables, discrete domains, assignments, agent views, nogoods
             and constraints shared by every solver in the package.
             Values are exact rationals tagged with a unit, so constraint
             predicates never compare floats for equality.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import (Callable, Dict, FrozenSet, Iterable, Iterator, List,
                    Mapping, Optional, Tuple, Union)

# Agent numbers double as the agreed-upon tie-break convention.
AgentId = int
PriorityValue = int

Scalar = Union[int, float, str, Fraction]


class Unit(str, Enum):
    """
    Unit tag carried by every Value.
    """
    MILLIWATT = "mW"
    BITS_PER_SECOND = "bit/s"
    NONE = ""


class Verdict(Enum):
    """
    Outcome of evaluating one constraint against a partial assignment.
    """
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    UNDETERMINED = "undetermined"


def to_fraction(scalar: Scalar) -> Fraction:
    """
    Converts a scalar to an exact Fraction.

    Floats go through their shortest repr, so 0.1 becomes 1/10 and not the
    binary expansion of 0.1.

    Parameters:
    - scalar (Scalar): The number to convert.

    Returns:
    - Fraction: The exact rational value.
    """
    if isinstance(scalar, Fraction):
        return scalar
    if isinstance(scalar, float):
        return Fraction(repr(scalar))
    return Fraction(scalar)


@dataclass(frozen=True, order=True)
class VarId:
    """
    Identifies one variable: its owning agent and its local index.

    Attributes:
    - owner (AgentId): The agent that owns the variable.
    - local_index (int): Index among the owner's variables (0 = power,
        1 = rate for multi-variable CRs).
    """
    owner: AgentId
    local_index: int = 0

    def __post_init__(self) -> None:
        if self.owner < 0 or self.local_index < 0:
            raise ValueError(
                f"Variable ids must be non-negative, got {self.owner}:"
                f"{self.local_index}.")

    def __str__(self) -> str:
        return f"{self.owner}.{self.local_index}"


@total_ordering
@dataclass(frozen=True)
class Value:
    """
    An exact rational quantity with a unit tag.

    Attributes:
    - scalar (Fraction): The exact value.
    - unit (Unit): The unit of the value.
    """
    scalar: Fraction
    unit: Unit = Unit.NONE

    def __post_init__(self) -> None:
        object.__setattr__(self, "scalar", to_fraction(self.scalar))
        object.__setattr__(self, "unit", Unit(self.unit))

    @classmethod
    def mw(cls, scalar: Scalar) -> "Value":
        return cls(to_fraction(scalar), Unit.MILLIWATT)

    @classmethod
    def bps(cls, scalar: Scalar) -> "Value":
        return cls(to_fraction(scalar), Unit.BITS_PER_SECOND)

    @cached_property
    def magnitude(self) -> float:
        """
        Returns the value as a float, for gain and SINR arithmetic.
        """
        return float(self.scalar)

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, Value):
            return NotImplemented
        if self.unit != other.unit:
            raise ValueError(
                f"Cannot compare {self.unit.value!r} with "
                f"{other.unit.value!r}.")
        return self.scalar < other.scalar

    def __str__(self) -> str:
        number = str(self.scalar) if self.scalar.denominator != 1 \
            else str(self.scalar.numerator)
        return f"{number} {self.unit.value}".strip()


@dataclass(frozen=True)
class Domain:
    """
    A finite, non-empty domain stored in descending preference order.

    The first value is the preferred one (maximum power, maximum rate), so
    ties in the min-conflict heuristic resolve towards it.

    Attributes:
    - values (Tuple[Value, ...]): Strictly descending values, one unit.
    """
    values: Tuple[Value, ...]

    def __post_init__(self) -> None:
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ValueError("A domain needs at least one value.")
        units = {value.unit for value in values}
        if len(units) != 1:
            raise ValueError(f"Domain mixes units: {sorted(u.value for u in units)}.")  # noqa
        for higher, lower in zip(values, values[1:]):
            if not higher > lower:
                raise ValueError(
                    "Domain values must be strictly descending, got "
                    f"{higher} before {lower}.")

    @classmethod
    def of(cls, scalars: Iterable[Scalar], unit: Unit = Unit.NONE) -> \
            "Domain":
        """
        Builds a domain from plain numbers, sorting them descending.

        Parameters:
        - scalars (Iterable[Scalar]): The numbers in any order.
        - unit (Unit): The unit of every value.

        Returns:
        - Domain: The domain in descending order.
        """
        fractions = sorted({to_fraction(s) for s in scalars}, reverse=True)
        return cls(tuple(Value(f, unit) for f in fractions))

    @property
    def unit(self) -> Unit:
        return self.values[0].unit

    def first(self) -> Value:
        return self.values[0]

    def index(self, value: Value) -> int:
        return self.values.index(value)

    def truncated(self, cap: Value) -> "Domain":
        """
        Returns the sub-domain of values at or below a cap.

        Parameters:
        - cap (Value): The largest value to keep.

        Returns:
        - Domain: The truncated domain.

        Raises:
        - ValueError: If no value lies at or below the cap.
        """
        kept = tuple(value for value in self.values if value <= cap)
        if not kept:
            raise ValueError(f"No domain value at or below {cap}.")
        return Domain(kept)

    def __iter__(self) -> Iterator[Value]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> Value:
        return self.values[index]

    def __contains__(self, value: object) -> bool:
        return value in self.values


@dataclass(frozen=True)
class Assignment:
    """
    A variable, its value and the priority it was announced with.
    """
    var: VarId
    value: Value
    priority: PriorityValue = 0

    def __post_init__(self) -> None:
        if self.priority < 0:
            raise ValueError(f"Priority must be non-negative, got {self.priority}.")  # noqa

    def __str__(self) -> str:
        return f"({self.var}={self.value}, p{self.priority})"


class AgentView:
    """
    An agent's record of the latest known assignments of other agents.

    Replacing an entry keeps the newer value but never lowers the stored
    priority of that variable.

    Methods:
    - update(assignment): Records an assignment, returns whether anything
        changed.
    - get(var): Returns the stored assignment of a variable, if any.
    - values(): Returns the stored values as a plain mapping.
    - priority_of(var): Returns the stored priority of a variable.
    - max_priority(): Returns the highest stored priority (0 when empty).
    """

    def __init__(self, entries: Optional[Iterable[Assignment]] = None) -> \
            None:
        self._entries: Dict[VarId, Assignment] = {}
        for assignment in entries or ():
            self.update(assignment)

    def update(self, assignment: Assignment) -> bool:
        """
        Records an assignment under the monotone priority rule.

        Parameters:
        - assignment (Assignment): The incoming assignment.

        Returns:
        - bool: True if the stored value or priority changed.
        """
        old = self._entries.get(assignment.var)
        if old is None:
            self._entries[assignment.var] = assignment
            return True

        priority = max(old.priority, assignment.priority)
        if old.value == assignment.value and old.priority == priority:
            return False
        self._entries[assignment.var] = Assignment(
            assignment.var, assignment.value, priority)
        return True

    def get(self, var: VarId) -> Optional[Assignment]:
        return self._entries.get(var)

    def values(self) -> Dict[VarId, Value]:
        return {var: entry.value for var, entry in self._entries.items()}

    def priority_of(self, var: VarId) -> PriorityValue:
        return self._entries[var].priority

    def max_priority(self) -> PriorityValue:
        return max((entry.priority for entry in self._entries.values()),
                   default=0)

    def owners(self) -> FrozenSet[AgentId]:
        return frozenset(var.owner for var in self._entries)

    def copy(self) -> "AgentView":
        return AgentView(self._entries.values())

    def __contains__(self, var: object) -> bool:
        return var in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Assignment]:
        return iter(sorted(self._entries.values(), key=lambda a: a.var))

    def __repr__(self) -> str:
        return "AgentView(" + ", ".join(str(a) for a in self) + ")"


class Nogood:
    """
    A set of assignments known to admit no consistent extension.

    Two nogoods are equal when they name the same variable/value pairs;
    the priorities stored in the members are informational only. The
    empty nogood means the problem has no solution.
    """

    __slots__ = ("members", "_key")

    def __init__(self, members: Iterable[Assignment] = ()) -> None:
        members = frozenset(members)
        variables = [member.var for member in members]
        if len(variables) != len(set(variables)):
            raise ValueError("A nogood names each variable at most once.")
        self.members: FrozenSet[Assignment] = members
        self._key: FrozenSet[Tuple[VarId, Value]] = frozenset(
            (member.var, member.value) for member in members)

    def variables(self) -> FrozenSet[VarId]:
        return frozenset(var for var, _ in self._key)

    def owners(self) -> FrozenSet[AgentId]:
        return frozenset(var.owner for var, _ in self._key)

    def is_empty(self) -> bool:
        return not self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Nogood):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __len__(self) -> int:
        return len(self._key)

    def __iter__(self) -> Iterator[Assignment]:
        return iter(sorted(self.members, key=lambda a: a.var))

    def __repr__(self) -> str:
        return "Nogood{" + ", ".join(str(a) for a in self) + "}"


Predicate = Callable[[Mapping[VarId, Value]], bool]


@dataclass(frozen=True)
class Constraint:
    """
    A constraint over a set of variables.

    The predicate receives a mapping that covers the whole scope and
    returns True when the constraint is satisfied. It must be deterministic
    and side-effect free.

    Attributes:
    - cid (int): Identifier of the constraint.
    - scope (FrozenSet[VarId]): The constrained variables.
    - predicate (Predicate): Returns True iff satisfied.
    - name (str): Human-readable label for traces.
    """
    cid: int
    scope: FrozenSet[VarId]
    predicate: Predicate = field(compare=False, repr=False)
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", frozenset(self.scope))
        if not self.scope:
            raise ValueError(f"Constraint {self.cid} has an empty scope.")

    @classmethod
    def from_nogood(cls, nogood: Nogood, cid: int = -1) -> "Constraint":
        """
        Wraps a nogood as a constraint that is violated when every member
        takes its recorded value.

        Parameters:
        - nogood (Nogood): A non-empty nogood.
        - cid (int): Identifier to use.

        Returns:
        - Constraint: The equivalent constraint.
        """
        pairs = [(member.var, member.value) for member in nogood]

        def predicate(values: Mapping[VarId, Value]) -> bool:
            return not all(values[var] == value for var, value in pairs)

        return cls(cid, nogood.variables(), predicate, name=repr(nogood))

    def others(self, var: VarId) -> FrozenSet[VarId]:
        """
        Returns the scope without the given variable.
        """
        return self.scope - {var}


class CheckCounter:
    """
    Counts full-scope constraint evaluations performed by one agent.
    """

    def __init__(self, count: int = 0) -> None:
        self.count: int = count

    def increment(self, amount: int = 1) -> None:
        self.count += amount

    def __repr__(self) -> str:
        return f"CheckCounter({self.count})"


def scope_index(constraints: Iterable[Constraint]) -> \
        Dict[VarId, List[Constraint]]:
    """
    Groups constraints by the variables they mention.

    Parameters:
    - constraints (Iterable[Constraint]): The constraints to index.

    Returns:
    - Dict[VarId, List[Constraint]]: For each variable, the constraints
        whose scope contains it, in input order.
    """
    index: Dict[VarId, List[Constraint]] = {}
    for constraint in constraints:
        for var in constraint.scope:
            index.setdefault(var, []).append(constraint)
    return index
