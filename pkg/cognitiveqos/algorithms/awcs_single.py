"""
AwcsAgent Class
Date of Creation: 2026-10-17
Description: Asynchronous weak commitment search for an agent that owns a
             single variable. The agent announces its value with ok?
             messages, repairs it with the min-conflict heuristic when a
             higher-priority constraint or a stored nogood is violated, and
             when no value is left it sends a nogood and raises its own
             priority above everything in its view. An empty nogood proves
             that the problem has no solution.
"""

import logging
from typing import Dict, List, Optional, Sequence, Set, Tuple

from ..classes.agent import Agent
from ..classes.dcsp import (AgentId, AgentView, Assignment, Constraint,
                            Domain, Nogood, Value, VarId)
from ..classes.messages import (Message, NogoodMsg, NoSolution, Ok,
                                OutgoingList)
from ..helpers.consistency import (consistent_values, is_higher,
                                   is_violated, min_conflict_value)

logger = logging.getLogger(__name__)


class AwcsAgent(Agent):
    """
    Represents a single-variable AWCS agent.

    Attributes:
    - variable (VarId): The agent's only variable.
    - domain (Domain): Its values, most preferred first.
    - current_value (Value): The current assignment.
    - current_priority (int): The current priority value.
    - agent_view (AgentView): Latest known assignments of other agents.
    - nogood_list (Set[Nogood]): Nogoods received from other agents.
    - nogood_sent (Set[Nogood]): Nogoods this agent has generated.
    - neighbors (Set[AgentId]): Agents that receive this agent's ok?.
    - no_solution (bool): Whether the agent knows there is no solution.

    Methods:
    - start(): Checks the initial value and announces it to the neighbors.
    - receive(batch): Absorbs a batch of messages, then checks the view.
    - handle_ok(assignment): Processes a single ok? message.
    - handle_nogood(sender, nogood): Processes a single nogood message.
    - check_agent_view(): Repairs the value if it is inconsistent.
    - backtrack(): Generates a nogood and raises the priority.
    """

    def __init__(self, agent_id: AgentId, domain: Domain,
                 constraints: Sequence[Constraint],
                 neighbors: Optional[Sequence[AgentId]] = None,
                 learn_nogoods: bool = True, verbose: bool = False,
                 nccc: int = 0) -> None:
        """
        Initializes a new instance of the AwcsAgent class.

        Parameters:
        - agent_id (AgentId): The agent id, owner of variable (id, 0).
        - domain (Domain): The variable's domain.
        - constraints (Sequence[Constraint]): Constraints mentioning the
            variable.
        - neighbors (Optional[Sequence[AgentId]]): Initial neighbors,
            derived from the constraint scopes if omitted.
        - learn_nogoods (bool): Record nogoods and suppress repeated ones.
        - verbose (bool): Log decisions at INFO instead of DEBUG.
        - nccc (int): Starting NCCC counter.

        Raises:
        - ValueError: If a constraint does not mention the variable.
        """
        super().__init__(agent_id, verbose, nccc)
        self.variable = VarId(agent_id, 0)
        for constraint in constraints:
            if self.variable not in constraint.scope:
                raise ValueError(
                    f"Constraint {constraint.cid} does not involve agent "
                    f"{agent_id}.")

        self.domain = domain
        self.current_value: Value = domain.first()
        self.current_priority: int = 0
        self.agent_view = AgentView()
        self.nogood_list: Set[Nogood] = set()
        self.nogood_sent: Set[Nogood] = set()
        self.constraints = list(constraints)
        if neighbors is None:
            neighbors = [var.owner for c in self.constraints
                         for var in c.scope if var.owner != agent_id]
        self.neighbors: Set[AgentId] = set(neighbors) - {agent_id}
        self.learn_nogoods = learn_nogoods
        self.no_solution = False
        self._nogood_constraints: Dict[Nogood, Constraint] = {}

    def _is_above_me(self, var: VarId) -> bool:
        entry = self.agent_view.get(var)
        if entry is None:
            return False
        return is_higher((entry.priority, var),
                         (self.current_priority, self.variable))

    def _all_constraints(self) -> List[Constraint]:
        """
        Returns the constraints plus every stored nogood that mentions the
        variable, as constraints.
        """
        extra = []
        for nogood in sorted(self.nogood_list, key=repr):
            if self.variable not in nogood.variables():
                continue
            if nogood not in self._nogood_constraints:
                self._nogood_constraints[nogood] = Constraint.from_nogood(
                    nogood, cid=-1 - len(self._nogood_constraints))
            extra.append(self._nogood_constraints[nogood])
        return self.constraints + extra

    def _split_by_priority(self) -> Tuple[List[Constraint],
                                          List[Constraint]]:
        """
        Splits the constraints into those whose other members all have
        higher priority (checked by this agent) and the rest.
        """
        higher, lower = [], []
        for constraint in self._all_constraints():
            others = constraint.others(self.variable)
            if all(self._is_above_me(var) for var in others):
                higher.append(constraint)
            else:
                lower.append(constraint)
        return higher, lower

    def _ok(self) -> Ok:
        return Ok((Assignment(self.variable, self.current_value,
                              self.current_priority),))

    def _ok_to_neighbors(self) -> OutgoingList:
        message = self._ok()
        return [(neighbor, message) for neighbor in sorted(self.neighbors)]

    def _link(self, assignment: Assignment) -> Optional[AgentId]:
        """
        Adds the owner of an assignment as a neighbor if it is new.
        """
        owner = assignment.var.owner
        if owner == self.agent_id or owner in self.neighbors:
            return None
        self.neighbors.add(owner)
        self.log_event(f"linked to agent {owner}")
        return owner

    def _absorb_nogood(self, nogood: Nogood) -> List[AgentId]:
        if self.learn_nogoods:
            self.nogood_list.add(nogood)
        linked = []
        for member in nogood:
            owner = self._link(member)
            if owner is not None:
                self.agent_view.update(member)
                linked.append(owner)
        return linked

    def start(self) -> OutgoingList:
        """
        Checks the preferred value and announces the result to every
        neighbor.
        """
        outgoing = self.check_agent_view()
        if self.halted:
            return outgoing
        informed = {dst for dst, message in outgoing
                    if isinstance(message, Ok)}
        message = self._ok()
        outgoing.extend((neighbor, message)
                        for neighbor in sorted(self.neighbors - informed))
        return outgoing

    def receive(self, batch: Sequence[Message]) -> OutgoingList:
        """
        Absorbs every ok? and nogood of a batch, then checks the view once.

        Agents learnt from a nogood or from an ok? of an unknown sender
        receive the current assignment, unless the check already sent it.
        """
        if self.halted:
            return []

        linked: List[AgentId] = []
        for message in batch:
            if isinstance(message, NoSolution):
                self.halted = True
                self.no_solution = True
                self.log_event("received no-solution broadcast")
                return []
            if isinstance(message, Ok):
                for assignment in message.assignments:
                    if assignment.var == self.variable:
                        continue
                    owner = self._link(assignment)
                    if owner is not None:
                        linked.append(owner)
                    self.agent_view.update(assignment)
            elif isinstance(message, NogoodMsg):
                linked.extend(self._absorb_nogood(message.nogood))

        outgoing = self.check_agent_view()
        if self.halted or not linked:
            return outgoing
        informed = {dst for dst, message in outgoing
                    if isinstance(message, Ok)}
        reply = self._ok()
        outgoing.extend((owner, reply) for owner in sorted(set(linked))
                        if owner not in informed)
        return outgoing

    def handle_ok(self, assignment: Assignment) -> OutgoingList:
        return self.receive([Ok((assignment,))])

    def handle_nogood(self, sender: AgentId, nogood: Nogood) -> OutgoingList:
        return self.receive([NogoodMsg(sender, nogood)])

    def check_agent_view(self) -> OutgoingList:
        """
        Keeps the current value if it is consistent with the higher-priority
        part of the view, otherwise moves to the min-conflict consistent
        value or backtracks.

        Returns:
        - OutgoingList: Messages produced by the check.
        """
        if self.halted:
            return []

        higher, lower = self._split_by_priority()
        view = self.agent_view.values()
        view[self.variable] = self.current_value
        if not any(is_violated(c, view, self.checks) for c in higher):
            return []

        candidates = consistent_values(self.domain, self.variable, view,
                                       higher, self.checks)
        if not candidates:
            return self.backtrack()

        self.current_value = min_conflict_value(
            candidates, self.variable, view, lower, self.checks)
        self.log_event(f"value -> {self.current_value}")
        return self._ok_to_neighbors()

    def backtrack(self) -> OutgoingList:
        """
        Handles a dead end.

        The nogood is the set of higher-priority assignments that take part
        in a violated constraint for some value of the domain. An empty
        nogood is broadcast as NoSolution. A new nogood is sent to every
        agent it names; one generated before is not sent again. Either way
        the priority rises to one above the view's maximum and the value is
        re-chosen over the whole domain.

        Returns:
        - OutgoingList: Messages produced by the backtrack.
        """
        higher, _ = self._split_by_priority()
        trial = self.agent_view.values()
        members: Dict[VarId, Assignment] = {}
        for value in self.domain:
            trial[self.variable] = value
            for constraint in higher:
                if not is_violated(constraint, trial, self.checks):
                    continue
                for var in constraint.others(self.variable):
                    members[var] = self.agent_view.get(var)
        nogood = Nogood(members.values())

        if nogood.is_empty():
            self.halted = True
            self.no_solution = True
            self.log_event("empty nogood, broadcasting no solution")
            return [(None, NoSolution())]

        outgoing: OutgoingList = []
        if self.learn_nogoods and nogood in self.nogood_sent:
            logger.debug("agent %s: %r already sent", self.agent_id, nogood)
        else:
            if self.learn_nogoods:
                self.nogood_sent.add(nogood)
            recipients = sorted(nogood.owners())
            outgoing = [(owner, NogoodMsg(self.agent_id, nogood))
                        for owner in recipients]
            self.log_event(f"nogood {nogood!r} sent to {recipients}")

        self.current_priority = max(self.current_priority,
                                    1 + self.agent_view.max_priority())
        self.log_event(f"priority -> {self.current_priority}")

        trial = self.agent_view.values()
        self.current_value = min_conflict_value(
            list(self.domain), self.variable, trial,
            self._all_constraints(), self.checks)
        self.log_event(f"value -> {self.current_value}")
        return outgoing + self._ok_to_neighbors()

    def is_consistent(self) -> bool:
        higher, _ = self._split_by_priority()
        view = self.agent_view.values()
        view[self.variable] = self.current_value
        return not any(is_violated(c, view) for c in higher)

    def current_assignments(self) -> Dict[VarId, Value]:
        return {self.variable: self.current_value}
