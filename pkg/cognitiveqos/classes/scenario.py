"""
Scenario Classes
Date of Creation: 2026-10-17
Description: Immutable description of a cognitive radio deployment: the CR
             links that run the protocol, the PU links whose receivers cap
             the aggregate interference, and the channel gains between
             them. Powers are in mW and rates in bit/s.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import ScenarioError
from ..helpers.config import Mode
from .dcsp import AgentId, to_fraction

Position = Tuple[float, float]


@dataclass(frozen=True)
class CrLink:
    """
    A CR transmitter-receiver pair.

    Attributes:
    - id (AgentId): The CR's agent id.
    - tx_pos, rx_pos (Position): Positions in meters.
    - power_budget (Fraction): P_max in mW.
    - power_step (Fraction): Quantization step in mW.
    - sinr_threshold (float): Minimum SINR at R_min.
    - demand (int): Slots needed per frame (STDMA).
    - rate_min, rate_max, rate_step (int): Rate bounds and step in bit/s.
    """
    id: AgentId
    tx_pos: Position
    rx_pos: Position
    power_budget: Fraction
    power_step: Fraction
    sinr_threshold: float
    demand: int = 1
    rate_min: int = 64_000
    rate_max: int = 256_000
    rate_step: int = 32_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "power_budget", to_fraction(self.power_budget))  # noqa
        object.__setattr__(self, "power_step", to_fraction(self.power_step))
        if self.id < 1:
            raise ScenarioError(f"CR ids start at 1, got {self.id}.")
        if not 0 < self.power_step <= self.power_budget:
            raise ScenarioError(
                f"CR{self.id}: power step {self.power_step} mW must lie in "
                f"(0, {self.power_budget}] mW.")
        if self.sinr_threshold <= 0:
            raise ScenarioError(f"CR{self.id}: SINR threshold must be positive.")  # noqa
        if self.demand < 1:
            raise ScenarioError(f"CR{self.id}: demand must be at least 1 slot.")  # noqa
        if not 0 < self.rate_min <= self.rate_max or self.rate_step <= 0:
            raise ScenarioError(
                f"CR{self.id}: invalid rates {self.rate_min}..{self.rate_max}"
                f" step {self.rate_step} bit/s.")


@dataclass(frozen=True)
class PuLink:
    """
    A PU link. Its receiver tolerates at most interference_cap mW of
    aggregate CR interference; its transmitter adds a constant interference
    floor at the CR receivers.
    """
    id: AgentId
    tx_pos: Position
    rx_pos: Position
    interference_cap: float
    tx_power: float = 10.0

    def __post_init__(self) -> None:
        if self.interference_cap <= 0:
            raise ScenarioError(f"PU{self.id}: interference cap must be positive.")  # noqa
        if self.tx_power < 0:
            raise ScenarioError(f"PU{self.id}: transmit power must be non-negative.")  # noqa


@dataclass(frozen=True, eq=False)
class GainTable:
    """
    Channel gains.

    Attributes:
    - cr_to_cr (np.ndarray): n x n, entry [i, j] is CR j's tx to CR i's rx.
    - cr_to_pu (np.ndarray): K x n, entry [k, i] is CR i's tx to PU k's rx.
    - pu_floor (np.ndarray): Length n, PU transmitter interference in mW at
        each CR receiver.
    """
    cr_to_cr: np.ndarray
    cr_to_pu: np.ndarray
    pu_floor: np.ndarray

    def __post_init__(self) -> None:
        cr_to_cr = np.array(self.cr_to_cr, dtype=float)
        n = cr_to_cr.shape[0] if cr_to_cr.ndim == 2 else 0
        cr_to_pu = np.array(self.cr_to_pu, dtype=float).reshape(-1, n)
        pu_floor = np.array(self.pu_floor, dtype=float).reshape(n)
        if cr_to_cr.shape != (n, n) or n == 0:
            raise ScenarioError(f"cr_to_cr must be a non-empty square matrix, got shape {cr_to_cr.shape}.")  # noqa
        if np.any(cr_to_cr <= 0) or np.any(cr_to_pu <= 0):
            raise ScenarioError("All channel gains must be positive.")
        if np.any(pu_floor < 0):
            raise ScenarioError("PU interference floors must be non-negative.")  # noqa
        for name, array in (("cr_to_cr", cr_to_cr), ("cr_to_pu", cr_to_pu),
                            ("pu_floor", pu_floor)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def equals(self, other: "GainTable") -> bool:
        return (np.array_equal(self.cr_to_cr, other.cr_to_cr)
                and np.array_equal(self.cr_to_pu, other.cr_to_pu)
                and np.array_equal(self.pu_floor, other.pu_floor))


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Represents one deployment.

    Attributes:
    - cr_links (Tuple[CrLink, ...]): The CR links, row i of the gain table
        belongs to cr_links[i].
    - pu_links (Tuple[PuLink, ...]): The PU links.
    - gains (GainTable): Channel gains.
    - noise_floor (float): Thermal noise in mW.
    - spreading_gain (float): Spreading gain B.
    - mode (Mode): The access scheme.
    - frame_slots (int): Slots per frame T (STDMA).
    - seed (Optional[int]): Generation seed, echoed in every output.
    """
    cr_links: Tuple[CrLink, ...]
    pu_links: Tuple[PuLink, ...]
    gains: GainTable
    noise_floor: float
    spreading_gain: float = 128.0
    mode: Mode = Mode.CDMA_EQUAL
    frame_slots: int = 20
    seed: Optional[int] = None
    _index: Dict[AgentId, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cr_links", tuple(self.cr_links))
        object.__setattr__(self, "pu_links", tuple(self.pu_links))
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.cr_links:
            raise ScenarioError("A scenario needs at least one CR link.")
        if self.noise_floor <= 0:
            raise ScenarioError("The noise floor must be positive.")
        if self.frame_slots < 1:
            raise ScenarioError("A frame holds at least one slot.")

        cr_ids = [link.id for link in self.cr_links]
        pu_ids = [link.id for link in self.pu_links]
        if len(set(cr_ids + pu_ids)) != len(cr_ids) + len(pu_ids):
            raise ScenarioError("CR and PU ids must be unique across the scenario.")  # noqa
        n, k = len(cr_ids), len(pu_ids)
        if self.gains.cr_to_cr.shape != (n, n) or \
                self.gains.cr_to_pu.shape != (k, n):
            raise ScenarioError(
                f"Gain table shapes {self.gains.cr_to_cr.shape} and "
                f"{self.gains.cr_to_pu.shape} do not match {n} CRs and "
                f"{k} PUs.")
        object.__setattr__(self, "_index",
                           {cr_id: i for i, cr_id in enumerate(cr_ids)})

    @property
    def n_cr(self) -> int:
        return len(self.cr_links)

    @property
    def n_pu(self) -> int:
        return len(self.pu_links)

    @property
    def cr_ids(self) -> Tuple[AgentId, ...]:
        return tuple(link.id for link in self.cr_links)

    def index_of(self, cr_id: AgentId) -> int:
        try:
            return self._index[cr_id]
        except KeyError:
            raise ValueError(f"Unknown CR id {cr_id}.") from None

    def link(self, cr_id: AgentId) -> CrLink:
        return self.cr_links[self.index_of(cr_id)]

    def gain(self, victim: AgentId, aggressor: AgentId) -> float:
        """
        Gain from the aggressor's transmitter to the victim's receiver.
        """
        return float(self.gains.cr_to_cr[self.index_of(victim),
                                         self.index_of(aggressor)])

    def pu_floor(self, cr_id: AgentId) -> float:
        return float(self.gains.pu_floor[self.index_of(cr_id)])

    def equals(self, other: "Scenario") -> bool:
        return (self.cr_links == other.cr_links
                and self.pu_links == other.pu_links
                and self.gains.equals(other.gains)
                and self.noise_floor == other.noise_floor
                and self.spreading_gain == other.spreading_gain
                and self.mode == other.mode
                and self.frame_slots == other.frame_slots
                and self.seed == other.seed)

    def with_mode(self, mode: Mode) -> "Scenario":
        return Scenario(self.cr_links, self.pu_links, self.gains,
                        self.noise_floor, self.spreading_gain, mode,
                        self.frame_slots, self.seed)
