"""
STDMA partitioning, power and scheduling
Date of Creation: 2026-10-17
Description: The STDMA pipeline. Victim CRs signal their aggressors with
             one-bit conflict messages, and the conflict graph is split
             into connected components, each headed by its lowest id.
             Inside a set, CRs without a direct conflict share slots; each
             slot-sharing group tunes its powers with AWCS. Sets take turns
             in a circular round-robin order of their heads that rotates
             by one every frame.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from ..classes.agent import Agent
from ..classes.dcsp import AgentId, VarId
from ..classes.mailer import Mailer
from ..classes.messages import Conflict, Message, OutgoingList
from ..classes.scenario import Scenario
from ..errors import InfeasibleSchedule
from ..helpers.config import SimulationParams
from ..helpers.radio import meets
from .awcs_single import AwcsAgent
from .cdma import capped_power_domain, sinr_constraint
from .simulation import RunOutcome, Simulation

logger = logging.getLogger(__name__)

Edge = Tuple[AgentId, AgentId]
SlotGroup = Tuple[AgentId, ...]


@dataclass(frozen=True)
class InterferingPartition:
    """
    Disjoint sets of mutually interfering CRs.

    Attributes:
    - sets (Tuple[Tuple[AgentId, ...], ...]): Sorted members of each set,
        the sets ordered by head.
    """
    sets: Tuple[Tuple[AgentId, ...], ...]

    def __post_init__(self) -> None:
        sets = tuple(sorted((tuple(sorted(s)) for s in self.sets),
                            key=lambda s: s[0] if s else -1))
        members = [cr for s in sets for cr in s]
        if any(not s for s in sets):
            raise ValueError("Partition sets must not be empty.")
        if len(members) != len(set(members)):
            raise ValueError("Partition sets must be disjoint.")
        object.__setattr__(self, "sets", sets)

    @property
    def heads(self) -> Tuple[AgentId, ...]:
        return tuple(s[0] for s in self.sets)

    def members(self) -> Tuple[AgentId, ...]:
        return tuple(sorted(cr for s in self.sets for cr in s))

    def set_of_head(self, head: AgentId) -> Tuple[AgentId, ...]:
        for members in self.sets:
            if members[0] == head:
                return members
        raise ValueError(f"CR{head} heads no set.")

    def order(self, frame_index: int) -> Tuple[AgentId, ...]:
        return rotate_heads(self.heads, frame_index)


def rotate_heads(heads: Sequence[AgentId], frame_index: int) -> \
        Tuple[AgentId, ...]:
    """
    Round-robin set order of a frame: heads ascending, rotated right once
    per frame.
    """
    if frame_index < 0:
        raise ValueError(f"Frame index must be non-negative, got {frame_index}.")  # noqa
    ordered = sorted(heads)
    if not ordered:
        return ()
    shift = frame_index % len(ordered)
    if shift == 0:
        return tuple(ordered)
    return tuple(ordered[-shift:] + ordered[:-shift])


def partition_from_conflicts(ids: Iterable[AgentId],
                             edges: Iterable[Edge]) -> InterferingPartition:
    """
    The connected components of the conflict graph.
    """
    graph = nx.Graph()
    graph.add_nodes_from(ids)
    graph.add_edges_from(edges)
    return InterferingPartition(tuple(
        tuple(component) for component in nx.connected_components(graph)))


def conflicts_at_caps(scenario: Scenario, victim: AgentId,
                      aggressor: AgentId,
                      caps: Mapping[AgentId, Fraction]) -> bool:
    """
    Whether the victim misses its SINR threshold when only it and the
    aggressor transmit, both at their caps.
    """
    link = scenario.link(victim)
    signal = scenario.gain(victim, victim) * float(caps[victim])
    noise = scenario.noise_floor + scenario.pu_floor(victim) + \
        scenario.gain(victim, aggressor) * float(caps[aggressor])
    return not meets(signal / noise, link.sinr_threshold)


class ConflictDetector(Agent):
    """
    Detects the CRs that would drown this CR and tells them with a one-bit
    conflict message; records the conflicts it is told about.

    Attributes:
    - conflicts (Set[AgentId]): CRs this one conflicts with, either way.
    """

    def __init__(self, cr_id: AgentId, scenario: Scenario,
                 caps: Mapping[AgentId, Fraction], peers: Sequence[AgentId],
                 verbose: bool = False, nccc: int = 0) -> None:
        super().__init__(cr_id, verbose, nccc)
        self.conflicts: Set[AgentId] = set()
        self._scenario = scenario
        self._caps = caps
        self._peers = [peer for peer in sorted(peers) if peer != cr_id]

    def start(self) -> OutgoingList:
        outgoing: OutgoingList = []
        for peer in self._peers:
            self.checks.increment()
            if conflicts_at_caps(self._scenario, self.agent_id, peer,
                                 self._caps):
                self.conflicts.add(peer)
                outgoing.append((peer, Conflict(self.agent_id)))
        if outgoing:
            self.log_event(f"drowned by {[dst for dst, _ in outgoing]}")
        return outgoing

    def receive(self, batch: Sequence[Message]) -> OutgoingList:
        for message in batch:
            if isinstance(message, Conflict):
                self.conflicts.add(message.victim)
        return []


def stdma_build_partition(scenario: Scenario,
                          caps: Mapping[AgentId, Fraction], mailer: Mailer,
                          max_cycles: int = 20000,
                          verbose: bool = False) -> \
        Tuple[InterferingPartition, nx.Graph]:
    """
    Builds the partition from exchanged conflict bits.

    Parameters:
    - scenario (Scenario): The deployment.
    - caps (Mapping[AgentId, Fraction]): Negotiated caps; silenced CRs
        take no part.
    - mailer (Mailer): The transport; one Conflict message is counted per
        victim-aggressor pair.
    - max_cycles (int): Cycle cap.
    - verbose (bool): Log decisions at INFO.

    Returns:
    - Tuple[InterferingPartition, nx.Graph]: The partition and the
        conflict graph.
    """
    active = [cr for cr in scenario.cr_ids if caps[cr] > 0]
    graph = nx.Graph()
    graph.add_nodes_from(active)
    if not active:
        return InterferingPartition(()), graph

    detectors = [ConflictDetector(cr, scenario, caps, active, verbose)
                 for cr in active]
    Simulation(mailer, detectors, verbose=verbose).run(max_cycles)
    for detector in detectors:
        graph.add_edges_from((detector.agent_id, other)
                             for other in detector.conflicts)
    partition = partition_from_conflicts(active, graph.edges)
    logger.info("STDMA partition %s with heads %s", partition.sets,
                partition.heads)
    return partition, graph


def _by_node_id(graph: nx.Graph, colors: Dict) -> List[AgentId]:
    return sorted(graph)


def slot_groups(partition: InterferingPartition, graph: nx.Graph) -> \
        Dict[AgentId, List[SlotGroup]]:
    """
    Splits each set into groups of CRs with no conflict among them, by
    greedy colouring of the set's conflict subgraph in id order.

    Returns:
    - Dict[AgentId, List[SlotGroup]]: Per head, its groups in colour order.
    """
    groups: Dict[AgentId, List[SlotGroup]] = {}
    for members in partition.sets:
        colouring = nx.greedy_color(graph.subgraph(members),
                                    strategy=_by_node_id)
        classes: Dict[int, List[AgentId]] = {}
        for cr in members:
            classes.setdefault(colouring[cr], []).append(cr)
        groups[members[0]] = [tuple(sorted(classes[c]))
                              for c in sorted(classes)]
    return groups


@dataclass
class GroupPowerResult:
    """
    Outcome of the per-group power tuning.

    Attributes:
    - powers (Dict[AgentId, Fraction]): Powers of the served CRs in mW.
    - groups (Dict[AgentId, List[SlotGroup]]): Slot groups per head after
        failed groups were split.
    - infeasible (List[AgentId]): CRs that miss their threshold even alone.
    """
    powers: Dict[AgentId, Fraction] = field(default_factory=dict)
    groups: Dict[AgentId, List[SlotGroup]] = field(default_factory=dict)
    infeasible: List[AgentId] = field(default_factory=list)


def _group_constraints(scenario: Scenario, group: SlotGroup) -> List:
    constraints = []
    for cid, cr in enumerate(group):
        background = scenario.noise_floor + scenario.pu_floor(cr)
        interferers = [(VarId(other, 0), scenario.gain(cr, other))
                       for other in group if other != cr]
        threshold = scenario.link(cr).sinr_threshold
        constraints.append(sinr_constraint(
            cid, VarId(cr, 0), scenario.gain(cr, cr), interferers,
            background, lambda values, t=threshold: t,
            name=f"stdma sinr CR{cr}"))
    return constraints


def _alone_ok(scenario: Scenario, cr: AgentId, cap: Fraction) -> bool:
    snr = scenario.gain(cr, cr) * float(cap) / \
        (scenario.noise_floor + scenario.pu_floor(cr))
    return meets(snr, scenario.link(cr).sinr_threshold)


def stdma_group_power(partition: InterferingPartition, graph: nx.Graph,
                      scenario: Scenario, caps: Mapping[AgentId, Fraction],
                      mailer: Mailer,
                      params: SimulationParams = SimulationParams(),
                      verbose: bool = False) -> GroupPowerResult:
    """
    Tunes the powers of every slot-sharing group.

    Single CRs keep their cap when their SNR meets the threshold. Larger
    groups run AWCS over SINR constraints among their members, starting
    from the caps. A group without a solution is split into single CRs,
    each getting its own slots within the set's turn.

    Parameters:
    - partition (InterferingPartition): The interfering sets.
    - graph (nx.Graph): The conflict graph.
    - scenario (Scenario): The deployment.
    - caps (Mapping[AgentId, Fraction]): Negotiated caps.
    - mailer (Mailer): The transport.
    - params (SimulationParams): Cycle cap and nogood learning.
    - verbose (bool): Log decisions at INFO.

    Returns:
    - GroupPowerResult: Powers, final groups and infeasible CRs.
    """
    result = GroupPowerResult()
    for head, groups in slot_groups(partition, graph).items():
        final: List[SlotGroup] = []
        for group in groups:
            if len(group) > 1:
                constraints = _group_constraints(scenario, group)
                agents = [AwcsAgent(
                    cr, capped_power_domain(scenario, cr, caps[cr]),
                    [c for c in constraints if VarId(cr, 0) in c.scope],
                    learn_nogoods=params.learn_nogoods, verbose=verbose)
                    for cr in group]
                simulation = Simulation(mailer, agents, verbose=verbose)
                outcome = simulation.run(params.max_cycles)
                if outcome is RunOutcome.SOLVED:
                    values = simulation.assignments()
                    for cr in group:
                        result.powers[cr] = values[VarId(cr, 0)].scalar
                    final.append(group)
                    continue
                logger.info("slot group %s ended with %s, splitting",
                            group, outcome.value)

            for cr in group:
                if _alone_ok(scenario, cr, caps[cr]):
                    result.powers[cr] = caps[cr]
                    final.append((cr,))
                else:
                    result.infeasible.append(cr)
        result.groups[head] = final
    result.infeasible.sort()
    return result


@dataclass(frozen=True, eq=False)
class FrameSchedule:
    """
    Slot plan of one frame.

    Attributes:
    - frame_index (int): The frame counter.
    - order (Tuple[AgentId, ...]): Heads in the order their sets go.
    - cr_ids (Tuple[AgentId, ...]): Row labels of the pattern matrix.
    - patterns (np.ndarray): Binary matrix Q, one column per access
        pattern.
    - slots (Tuple[int, ...]): Slots y_s given to each pattern.
    - frame_slots (int): Frame length T.
    """
    frame_index: int
    order: Tuple[AgentId, ...]
    cr_ids: Tuple[AgentId, ...]
    patterns: np.ndarray
    slots: Tuple[int, ...]
    frame_slots: int

    @property
    def used_slots(self) -> int:
        return int(sum(self.slots))

    def slots_for(self, cr_id: AgentId) -> int:
        row = self.cr_ids.index(cr_id)
        return int(np.dot(self.patterns[row], self.slots))

    def pattern_members(self, column: int) -> List[AgentId]:
        return [cr for row, cr in enumerate(self.cr_ids)
                if self.patterns[row, column]]

    def slot_table(self) -> List[List[AgentId]]:
        """
        Active CRs per slot; trailing unused slots are empty lists.
        """
        table: List[List[AgentId]] = []
        for column, count in enumerate(self.slots):
            table.extend([self.pattern_members(column)] * count)
        table.extend([] for _ in range(self.frame_slots - len(table)))
        return table


def stdma_schedule(partition: InterferingPartition,
                   groups: Mapping[AgentId, Sequence[SlotGroup]],
                   demands: Mapping[AgentId, int], frame_slots: int,
                   frame_index: int) -> FrameSchedule:
    """
    Builds the schedule of one frame.

    Sets go in the rotated head order. Within its turn a set gives each
    slot group one access pattern, lasting as many slots as the largest
    demand in the group.

    Parameters:
    - partition (InterferingPartition): The interfering sets.
    - groups (Mapping[AgentId, Sequence[SlotGroup]]): Slot groups per head.
    - demands (Mapping[AgentId, int]): Slots each CR needs per frame.
    - frame_slots (int): Frame length T.
    - frame_index (int): The frame counter.

    Returns:
    - FrameSchedule: The frame's patterns and slot counts.

    Raises:
    - InfeasibleSchedule: If the patterns need more than T slots.
    """
    order = partition.order(frame_index)
    columns: List[SlotGroup] = []
    for head in order:
        columns.extend(group for group in groups.get(head, ()) if group)

    cr_ids = tuple(sorted(cr for group in columns for cr in group))
    patterns = np.zeros((len(cr_ids), len(columns)), dtype=int)
    slots = []
    for column, group in enumerate(columns):
        for cr in group:
            patterns[cr_ids.index(cr), column] = 1
        slots.append(max(demands[cr] for cr in group))

    requested = sum(slots)
    if requested > frame_slots:
        raise InfeasibleSchedule(requested - frame_slots, requested,
                                 frame_slots)
    patterns.setflags(write=False)
    return FrameSchedule(frame_index, order, cr_ids, patterns, tuple(slots),
                         frame_slots)
