from __future__ import annotations

import logging
import math
import random
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Literal

import networkx as nx
from pydantic import Field, field_validator

from wsnguard_core.schemas import BROADCAST_ID, DTOBase, MoteRole

logger = logging.getLogger(__name__)

DEFAULT_RADIO_RANGE_M = 10.0
DEFAULT_INITIAL_ENERGY_MJ = 1_000.0


class InvalidConfig(ValueError):
    pass


class MotePlacement(DTOBase):
    id: int = Field(ge=0, lt=BROADCAST_ID)
    x: float
    y: float
    radio_range_m: float | None = None
    initial_energy_mj: float | None = Field(default=None, ge=0.0)

    @field_validator("radio_range_m")
    @classmethod
    def validate_range(cls, value: float | None) -> float | None:
        if value is not None and value < 0:
            raise ValueError("radio_range_m must be >= 0")
        return value


class TopologyConfig(DTOBase):
    layout: Literal["explicit", "grid", "random"] = "grid"
    motes: list[MotePlacement] = Field(default_factory=list)
    rows: int = Field(default=3, ge=1)
    cols: int = Field(default=3, ge=1)
    spacing_m: float = Field(default=10.0, gt=0.0)
    count: int = Field(default=10, ge=0)
    area_m: float = Field(default=50.0, gt=0.0)
    placement_seed: int | None = None
    radio_range_m: float = DEFAULT_RADIO_RANGE_M
    initial_energy_mj: float = Field(default=DEFAULT_INITIAL_ENERGY_MJ, ge=0.0)
    sink_id: int = Field(default=0, ge=0)

    @field_validator("radio_range_m")
    @classmethod
    def validate_range(cls, value: float) -> float:
        if value < 0:
            raise ValueError("topology.radio_range_m must be >= 0")
        return value

    def mote_ids(self) -> list[int]:
        if self.layout == "explicit":
            return [placement.id for placement in self.motes]
        if self.layout == "grid":
            return list(range(self.rows * self.cols))
        return list(range(self.count))


@dataclass(slots=True)
class Mote:
    id: int
    position: tuple[float, float]
    radio_range: float
    energy_uj: int
    initial_energy_uj: int
    clock_offset_ms: float = 0.0
    role: MoteRole = MoteRole.HONEST

    @property
    def alive(self) -> bool:
        return self.energy_uj > 0

    @property
    def energy_mj(self) -> float:
        return self.energy_uj / 1000


@dataclass(slots=True)
class Network:
    graph: nx.Graph
    sink_id: int
    identities: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def mote(self, mote_id: int) -> Mote:
        return self.graph.nodes[mote_id]["mote"]

    @property
    def mote_ids(self) -> list[int]:
        return sorted(self.graph.nodes)

    def motes(self) -> list[Mote]:
        return [self.mote(mote_id) for mote_id in self.mote_ids]

    def neighbors(self, mote_id: int) -> list[int]:
        return sorted(self.graph.neighbors(mote_id))

    def alive_neighbors(self, mote_id: int) -> list[int]:
        return [other for other in self.neighbors(mote_id) if self.mote(other).alive]

    def has_link(self, a: int, b: int) -> bool:
        return self.graph.has_edge(a, b)

    def within_range(self, mote_id: int, range_m: float) -> list[int]:
        origin = self.mote(mote_id).position
        return [
            other
            for other in self.mote_ids
            if other != mote_id and math.dist(origin, self.mote(other).position) <= range_m
        ]

    def claim_identities(self, owner: int, claimed: Iterable[int]) -> None:
        self.identities[owner] = tuple(claimed)

    def identities_of(self, mote_id: int) -> tuple[int, ...]:
        return (mote_id, *self.identities.get(mote_id, ()))

    def owner_of(self, identity: int) -> int | None:
        for owner, claimed in self.identities.items():
            if identity in claimed:
                return owner
        if identity in self.graph.nodes:
            return identity
        return None


def build_topology(config: TopologyConfig, *, seed: int = 0) -> Network:
    placements = _placements(config, seed=seed)
    if not placements:
        raise InvalidConfig("topology has zero motes")

    ids = [placement.id for placement in placements]
    if len(set(ids)) != len(ids):
        raise InvalidConfig("topology has duplicate mote ids")
    if config.sink_id not in ids:
        raise InvalidConfig(f"no sink: sink_id {config.sink_id} is not a mote")

    graph = nx.Graph()
    for placement in placements:
        radio_range = (
            placement.radio_range_m
            if placement.radio_range_m is not None
            else config.radio_range_m
        )
        if radio_range < 0:
            raise InvalidConfig(f"mote {placement.id} has negative radio range")
        energy_mj = (
            placement.initial_energy_mj
            if placement.initial_energy_mj is not None
            else config.initial_energy_mj
        )
        energy_uj = int(round(energy_mj * 1000))
        mote = Mote(
            id=placement.id,
            position=(placement.x, placement.y),
            radio_range=radio_range,
            energy_uj=energy_uj,
            initial_energy_uj=energy_uj,
            role=MoteRole.SINK if placement.id == config.sink_id else MoteRole.HONEST,
        )
        graph.add_node(placement.id, mote=mote)

    motes = [graph.nodes[mote_id]["mote"] for mote_id in sorted(graph.nodes)]
    for index, left in enumerate(motes):
        for right in motes[index + 1 :]:
            reach = min(left.radio_range, right.radio_range)
            if math.dist(left.position, right.position) <= reach:
                graph.add_edge(left.id, right.id)

    logger.info(
        "topology built layout=%s motes=%d links=%d sink=%d",
        config.layout,
        graph.number_of_nodes(),
        graph.number_of_edges(),
        config.sink_id,
    )
    return Network(graph=graph, sink_id=config.sink_id)


def neighbor_table(
    network: Network,
    mote_id: int,
    *,
    heard_from: Iterable[int] = (),
) -> list[int]:
    """Identities a mote believes are its neighbors.

    `heard_from` adds physical motes heard outside normal radio range (boosted hellos).
    """
    sources = set(network.alive_neighbors(mote_id)) | set(heard_from)
    sources.discard(mote_id)
    table: set[int] = set()
    for source in sources:
        table.update(network.identities_of(source))
    table.discard(mote_id)
    return sorted(table)


def _placements(config: TopologyConfig, *, seed: int) -> list[MotePlacement]:
    if config.layout == "explicit":
        return list(config.motes)

    if config.layout == "grid":
        return [
            MotePlacement(
                id=row * config.cols + col,
                x=col * config.spacing_m,
                y=row * config.spacing_m,
            )
            for row in range(config.rows)
            for col in range(config.cols)
        ]

    rng = random.Random(config.placement_seed if config.placement_seed is not None else seed)
    return [
        MotePlacement(
            id=index,
            x=round(rng.uniform(0.0, config.area_m), 3),
            y=round(rng.uniform(0.0, config.area_m), 3),
        )
        for index in range(config.count)
    ]
