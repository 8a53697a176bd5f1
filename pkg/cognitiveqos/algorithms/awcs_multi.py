"""
MultiAwcsAgent Class
Date of Creation: 2026-10-17
Description: Asynchronous weak commitment search for an agent that owns
             several local variables (power and rate for a CR). Local
             variables carry independent priorities. The agent repairs its
             locals in priority order until they are consistent with each
             other and with the higher-priority part of its view, and only
             then announces the changed assignments to the CRs they relate
             to.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from ..classes.agent import Agent
from ..classes.dcsp import (AgentId, AgentView, Assignment, Constraint,
                            Domain, Nogood, Value, VarId)
from ..classes.messages import (Message, NogoodMsg, NoSolution, Ok,
                                OutgoingList)
from ..helpers.consistency import (consistent_values, is_higher,
                                   is_violated, min_conflict_value,
                                   priority_key)

logger = logging.getLogger(__name__)


@dataclass
class LocalVariable:
    """
    One variable owned by a multi-variable agent.
    """
    var: VarId
    domain: Domain
    value: Value
    priority: int = 0

    def key(self) -> Tuple[int, int, int]:
        return priority_key(self.priority, self.var)

    def assignment(self) -> Assignment:
        return Assignment(self.var, self.value, self.priority)


class MultiAwcsAgent(Agent):
    """
    Represents an AWCS agent with several local variables.

    Attributes:
    - locals (List[LocalVariable]): The local variables, by local index.
    - agent_view (AgentView): Latest known assignments of other agents.
    - nogood_list (Set[Nogood]): Received nogoods and generated ones that
        name another local variable.
    - nogood_sent (Set[Nogood]): Nogoods this agent has generated.
    - intra (List[Constraint]): Constraints over local variables only.
    - inter (List[Constraint]): Constraints that involve other agents.
    - related (Dict[VarId, Set[AgentId]]): Per local variable, the agents
        sharing an inter-agent constraint with it.
    - linked (Set[AgentId]): Agents learnt from nogoods.

    Methods:
    - start(): Repairs the locals and announces them.
    - receive(batch): Absorbs a batch of messages, then checks the view.
    - handle_ok_multi(assignment): Processes a single ok? message.
    - handle_nogood(sender, nogood): Processes a single nogood message.
    - check_agent_view(): Runs the local repair loop.
    - local_repair_order(violating): Picks the local variable to repair.
    """

    def __init__(self, agent_id: AgentId, domains: Sequence[Domain],
                 constraints: Sequence[Constraint],
                 learn_nogoods: bool = True, verbose: bool = False,
                 nccc: int = 0, max_local_steps: Optional[int] = None) -> \
            None:
        """
        Initializes a new instance of the MultiAwcsAgent class.

        Parameters:
        - agent_id (AgentId): The agent id.
        - domains (Sequence[Domain]): One domain per local variable; local
            variable i is (agent_id, i).
        - constraints (Sequence[Constraint]): Constraints mentioning at
            least one local variable.
        - learn_nogoods (bool): Record nogoods and suppress repeated ones.
        - verbose (bool): Log decisions at INFO instead of DEBUG.
        - nccc (int): Starting NCCC counter.
        - max_local_steps (Optional[int]): Guard on one repair loop.

        Raises:
        - ValueError: If no domain is given or a constraint mentions no
            local variable.
        """
        super().__init__(agent_id, verbose, nccc)
        if not domains:
            raise ValueError("A multi-variable agent needs at least one domain.")  # noqa
        self.locals: List[LocalVariable] = [
            LocalVariable(VarId(agent_id, index), domain, domain.first())
            for index, domain in enumerate(domains)]
        self._by_var: Dict[VarId, LocalVariable] = {
            local.var: local for local in self.locals}

        self.constraints = list(constraints)
        self.intra: List[Constraint] = []
        self.inter: List[Constraint] = []
        self.related: Dict[VarId, Set[AgentId]] = {
            local.var: set() for local in self.locals}
        for constraint in self.constraints:
            mine = [var for var in constraint.scope if var in self._by_var]
            if not mine:
                raise ValueError(
                    f"Constraint {constraint.cid} does not involve agent "
                    f"{agent_id}.")
            owners = {var.owner for var in constraint.scope} - {agent_id}
            if not owners:
                self.intra.append(constraint)
                continue
            self.inter.append(constraint)
            for var in mine:
                self.related[var] |= owners

        self.agent_view = AgentView()
        self.nogood_list: Set[Nogood] = set()
        self.nogood_sent: Set[Nogood] = set()
        self.linked: Set[AgentId] = set()
        self.learn_nogoods = learn_nogoods
        self.no_solution = False
        self._published: Dict[VarId, Tuple[Value, int]] = {}
        self._nogood_constraints: Dict[Nogood, Constraint] = {}
        self._max_local_steps = max_local_steps or 4 * len(self.locals) * \
            sum(len(domain) for domain in domains)

    def _values(self) -> Dict[VarId, Value]:
        values = self.agent_view.values()
        for local in self.locals:
            values[local.var] = local.value
        return values

    def _priority_of(self, var: VarId) -> Optional[int]:
        local = self._by_var.get(var)
        if local is not None:
            return local.priority
        entry = self.agent_view.get(var)
        return None if entry is None else entry.priority

    def _constraints_of(self, local: LocalVariable) -> List[Constraint]:
        result = [c for c in self.constraints if local.var in c.scope]
        for nogood in sorted(self.nogood_list, key=repr):
            if local.var not in nogood.variables():
                continue
            if nogood not in self._nogood_constraints:
                self._nogood_constraints[nogood] = Constraint.from_nogood(
                    nogood, cid=-1 - len(self._nogood_constraints))
            result.append(self._nogood_constraints[nogood])
        return result

    def _split_by_priority(self, local: LocalVariable) -> \
            Tuple[List[Constraint], List[Constraint]]:
        higher, lower = [], []
        for constraint in self._constraints_of(local):
            above = True
            for var in constraint.others(local.var):
                priority = self._priority_of(var)
                if priority is None or not is_higher(
                        (priority, var), (local.priority, local.var)):
                    above = False
                    break
            (higher if above else lower).append(constraint)
        return higher, lower

    def _violates(self, local: LocalVariable, values: Dict[VarId, Value],
                  count: bool = True) -> bool:
        higher, _ = self._split_by_priority(local)
        counter = self.checks if count else None
        return any(is_violated(c, values, counter) for c in higher)

    def local_repair_order(self, violating: Sequence[LocalVariable]) -> \
            VarId:
        """
        Returns the highest-priority variable among the violating locals;
        ties go to the lower local index.

        Raises:
        - ValueError: If no local is violating.
        """
        if not violating:
            raise ValueError("local_repair_order needs a violating variable.")
        return min(violating, key=LocalVariable.key).var

    def _resolvent(self, local: LocalVariable,
                   higher: Sequence[Constraint],
                   values: Dict[VarId, Value]) -> Nogood:
        trial = dict(values)
        members: Dict[VarId, Assignment] = {}
        for value in local.domain:
            trial[local.var] = value
            for constraint in higher:
                if not is_violated(constraint, trial, self.checks):
                    continue
                for var in constraint.others(local.var):
                    members[var] = Assignment(var, values[var],
                                              self._priority_of(var))
        return Nogood(members.values())

    def _max_related_priority(self, local: LocalVariable) -> int:
        priorities = [0]
        for constraint in self._constraints_of(local):
            for var in constraint.others(local.var):
                priority = self._priority_of(var)
                if priority is not None:
                    priorities.append(priority)
        return max(priorities)

    def _publish(self, below: Optional[LocalVariable] = None) -> \
            OutgoingList:
        """
        Sends every changed local to the agents it relates to, one ok? per
        recipient. With below set, only locals of higher priority than it
        are published.
        """
        batches: Dict[AgentId, List[Assignment]] = {}
        for local in self.locals:
            if below is not None and local.key() >= below.key():
                continue
            state = (local.value, local.priority)
            if self._published.get(local.var) == state:
                continue
            self._published[local.var] = state
            for owner in sorted(self.related[local.var] | self.linked):
                batches.setdefault(owner, []).append(local.assignment())
        return [(owner, Ok(tuple(batches[owner])))
                for owner in sorted(batches)]

    def check_agent_view(self) -> OutgoingList:
        """
        Runs the local repair loop and publishes the result.

        The highest-priority local that violates a constraint with
        higher-priority variables is repaired first: it takes the
        min-conflict consistent value, or, if none exists, a nogood is
        recorded and sent and the variable's priority rises above every
        related variable. A nogood generated before is not sent again, but
        the priority still rises. Changes leave the agent only once all
        locals are consistent; locals still stuck after the loop hold back
        everything of lower priority.

        Returns:
        - OutgoingList: Nogoods, ok? batches or a NoSolution broadcast.
        """
        if self.halted:
            return []

        outgoing: OutgoingList = []
        for _ in range(self._max_local_steps):
            values = self._values()
            violating = [local for local in self.locals
                         if self._violates(local, values)]
            if not violating:
                break

            local = self._by_var[self.local_repair_order(violating)]
            higher, lower = self._split_by_priority(local)
            candidates = consistent_values(local.domain, local.var, values,
                                           higher, self.checks)
            if candidates:
                local.value = min_conflict_value(
                    candidates, local.var, values, lower, self.checks)
                self.log_event(f"{local.var} -> {local.value}")
                continue

            nogood = self._resolvent(local, higher, values)
            if nogood.is_empty():
                self.halted = True
                self.no_solution = True
                self.log_event("empty nogood, broadcasting no solution")
                return outgoing + [(None, NoSolution())]
            if self.learn_nogoods and nogood in self.nogood_sent:
                logger.debug("agent %s: %r already sent", self.agent_id,
                             nogood)
            else:
                if self.learn_nogoods:
                    self.nogood_sent.add(nogood)
                    # Only a copy naming other locals constrains this agent.
                    if self.agent_id in nogood.owners():
                        self.nogood_list.add(nogood)
                recipients = sorted(nogood.owners() - {self.agent_id})
                outgoing.extend((owner, NogoodMsg(self.agent_id, nogood))
                                for owner in recipients)
                self.log_event(f"nogood {nogood!r} sent to {recipients}")

            local.priority = max(local.priority,
                                 1 + self._max_related_priority(local))
            self.log_event(f"priority of {local.var} -> {local.priority}")
            values = self._values()
            local.value = min_conflict_value(
                list(local.domain), local.var, values,
                self._constraints_of(local), self.checks)
            self.log_event(f"{local.var} -> {local.value}")
        else:
            logger.warning("agent %s: local repair did not settle within "
                           "%d steps", self.agent_id, self._max_local_steps)

        values = self._values()
        stuck = [local for local in self.locals
                 if self._violates(local, values, count=False)]
        if stuck:
            first_stuck = min(stuck, key=LocalVariable.key)
            return outgoing + self._publish(below=first_stuck)
        return outgoing + self._publish()

    def start(self) -> OutgoingList:
        return self.check_agent_view()

    def receive(self, batch: Sequence[Message]) -> OutgoingList:
        """
        Absorbs a batch of messages and runs the repair loop once.

        A nogood or ok? naming an agent this one did not know links the
        two: the named assignment enters the view and the agent announces
        its own locals to the newcomer.
        """
        if self.halted:
            return []

        newcomers: List[AgentId] = []
        for message in batch:
            if isinstance(message, NoSolution):
                self.halted = True
                self.no_solution = True
                self.log_event("received no-solution broadcast")
                return []
            if isinstance(message, Ok):
                for assignment in message.assignments:
                    owner = assignment.var.owner
                    if owner == self.agent_id:
                        continue
                    if owner not in self._known():
                        self._link(owner)
                        newcomers.append(owner)
                    self.agent_view.update(assignment)
            elif isinstance(message, NogoodMsg):
                newcomers.extend(self._absorb_nogood(message.nogood))

        outgoing = self.check_agent_view()
        if self.halted or not newcomers:
            return outgoing
        informed = {dst for dst, message in outgoing
                    if isinstance(message, Ok)}
        reply = Ok(tuple(local.assignment() for local in self.locals))
        outgoing.extend((owner, reply) for owner in sorted(set(newcomers))
                        if owner not in informed)
        return outgoing

    def _known(self) -> Set[AgentId]:
        known = set(self.linked)
        for owners in self.related.values():
            known |= owners
        return known

    def _link(self, owner: AgentId) -> None:
        self.linked.add(owner)
        self.log_event(f"linked to agent {owner}")

    def _absorb_nogood(self, nogood: Nogood) -> List[AgentId]:
        if self.learn_nogoods:
            self.nogood_list.add(nogood)
        newcomers: List[AgentId] = []
        for member in nogood:
            owner = member.var.owner
            if owner == self.agent_id:
                continue
            if owner not in self._known():
                self._link(owner)
                newcomers.append(owner)
            if owner in newcomers:
                self.agent_view.update(member)
        return newcomers

    def handle_ok_multi(self, assignment: Assignment) -> OutgoingList:
        return self.receive([Ok((assignment,))])

    def handle_nogood(self, sender: AgentId, nogood: Nogood) -> OutgoingList:
        return self.receive([NogoodMsg(sender, nogood)])

    def is_consistent(self) -> bool:
        values = self._values()
        return not any(self._violates(local, values, count=False)
                       for local in self.locals)

    def current_assignments(self) -> Dict[VarId, Value]:
        return {local.var: local.value for local in self.locals}
