from __future__ import annotations

import json
from enum import StrEnum
from pathlib import Path
from typing import Any

from pydantic import Field, ValidationError, field_validator, model_validator

from wsnguard_core.adversary.behaviors import AttackerConfig
from wsnguard_core.crypto.primitives import TAG_SIZE
from wsnguard_core.detection.probes import DetectionConfig
from wsnguard_core.mutesla.chain import (
    DEFAULT_CHAIN_LENGTH,
    DEFAULT_DISCLOSURE_DELAY,
    DEFAULT_INTERVAL_MS,
    DEFAULT_MAX_CLOCK_ERROR_MS,
)
from wsnguard_core.netsim.energy import EnergyModel
from wsnguard_core.netsim.packets import MAX_WIRE_PAYLOAD
from wsnguard_core.netsim.reliable import DEFAULT_ACK_TIMEOUT_MS, DEFAULT_MAX_RETRIES, LossRule
from wsnguard_core.netsim.topology import TopologyConfig, build_topology
from wsnguard_core.routing.discovery import DEFAULT_REQUEST_TIMEOUT_MS
from wsnguard_core.routing.table import DEFAULT_ROUTE_LIFETIME_MS
from wsnguard_core.schemas import (
    AttackerKind,
    DTOBase,
    ProtectionMode,
    Reliability,
    RoutingVariant,
    json_schema_for,
)
from wsnguard_core.snep.channel import DEFAULT_RECEIVE_WINDOW

DEFAULT_DURATION_MS = 1_000.0
DEFAULT_METRICS_BIN_MS = 100
DEFAULT_SCENARIO_HOP_LATENCY_MS = 5.0
DEFAULT_READING_BYTES = 16

# interval index (4 bytes) plus tag ride along with every authenticated broadcast
MAX_BROADCAST_MESSAGE = MAX_WIRE_PAYLOAD - 4 - TAG_SIZE


class ScenarioParseError(ValueError):
    def __init__(self, message: str, *, line: int, column: int) -> None:
        super().__init__(message)
        self.line = line
        self.column = column


class ScenarioValidationError(ValueError):
    def __init__(self, message: str, *, errors: list[tuple[str, str]]) -> None:
        super().__init__(message)
        self.errors = errors


class TrafficKind(StrEnum):
    DATA = "data"
    BROADCAST = "broadcast"


class MuteslaConfig(DTOBase):
    enabled: bool = True
    chain_length: int = Field(default=DEFAULT_CHAIN_LENGTH, ge=1)
    interval_ms: float = Field(default=DEFAULT_INTERVAL_MS, gt=0.0)
    disclosure_delay: int = Field(default=DEFAULT_DISCLOSURE_DELAY, ge=1)
    max_clock_error_ms: float = Field(default=DEFAULT_MAX_CLOCK_ERROR_MS, ge=0.0)
    chain_seed_hex: str | None = None

    @model_validator(mode="after")
    def validate_timing(self) -> MuteslaConfig:
        if self.max_clock_error_ms >= self.disclosure_delay * self.interval_ms:
            raise ValueError(
                "mutesla.max_clock_error_ms must be below disclosure_delay * interval_ms"
            )
        return self


class ReliabilityConfig(DTOBase):
    max_retries: int = Field(default=DEFAULT_MAX_RETRIES, ge=0)
    ack_timeout_ms: float = Field(default=DEFAULT_ACK_TIMEOUT_MS, gt=0.0)


class SnepConfig(DTOBase):
    receive_window: int = Field(default=DEFAULT_RECEIVE_WINDOW, ge=0)


class ProtocolConfig(DTOBase):
    protection_mode: ProtectionMode = ProtectionMode.AUTH_ENC
    routing: RoutingVariant = RoutingVariant.BEACON_TREE
    mutesla: MuteslaConfig = Field(default_factory=MuteslaConfig)
    reliability: ReliabilityConfig = Field(default_factory=ReliabilityConfig)
    snep: SnepConfig = Field(default_factory=SnepConfig)
    request_timeout_ms: float = Field(default=DEFAULT_REQUEST_TIMEOUT_MS, gt=0.0)
    route_lifetime_ms: float = Field(default=DEFAULT_ROUTE_LIFETIME_MS, gt=0.0)


class TrafficEntry(DTOBase):
    at_ms: float = Field(default=0.0, ge=0.0)
    kind: TrafficKind = TrafficKind.DATA
    src: int = Field(ge=0)
    dst: int | None = Field(default=None, ge=0)
    reliability: Reliability = Reliability.RELIABLE
    payload_hex: str | None = None
    size_bytes: int = Field(default=DEFAULT_READING_BYTES, ge=0, le=MAX_WIRE_PAYLOAD)
    repeat: int = Field(default=1, ge=1)
    interval_ms: float = Field(default=0.0, ge=0.0)

    @field_validator("payload_hex")
    @classmethod
    def validate_payload_hex(cls, value: str | None) -> str | None:
        if value is None:
            return None
        try:
            bytes.fromhex(value)
        except ValueError as exc:
            raise ValueError("payload_hex must be hex encoded") from exc
        return value.lower()

    @model_validator(mode="after")
    def validate_repeat(self) -> TrafficEntry:
        if self.repeat > 1 and self.interval_ms <= 0:
            raise ValueError("interval_ms must be > 0 when repeat > 1")
        return self

    @property
    def payload_size(self) -> int:
        if self.payload_hex is not None:
            return len(self.payload_hex) // 2
        return self.size_bytes


class Scenario(DTOBase):
    name: str = "scenario"
    topology: TopologyConfig = Field(default_factory=TopologyConfig)
    energy_model: EnergyModel = Field(default_factory=EnergyModel)
    protocols: ProtocolConfig = Field(default_factory=ProtocolConfig)
    traffic: list[TrafficEntry] = Field(default_factory=list)
    attackers: list[AttackerConfig] = Field(default_factory=list)
    losses: list[LossRule] = Field(default_factory=list)
    detection: DetectionConfig = Field(default_factory=DetectionConfig)
    duration_ms: float = Field(default=DEFAULT_DURATION_MS, gt=0.0)
    seed: int = Field(default=0, ge=0)
    metrics_bin_ms: int = Field(default=DEFAULT_METRICS_BIN_MS, gt=0)
    hop_latency_ms: float = Field(default=DEFAULT_SCENARIO_HOP_LATENCY_MS, gt=0.0)

    @field_validator("attackers")
    @classmethod
    def validate_attackers(cls, value: list[AttackerConfig]) -> list[AttackerConfig]:
        seen: set[int] = set()
        for index, attacker in enumerate(value):
            if attacker.mote_id in seen:
                raise ValueError(
                    f"attackers[{index}].mote_id {attacker.mote_id} is configured twice"
                )
            seen.add(attacker.mote_id)

        by_mote = {attacker.mote_id: attacker for attacker in value}
        for index, attacker in enumerate(value):
            if attacker.behavior != AttackerKind.WORMHOLE:
                continue
            partner = by_mote.get(attacker.peer) if attacker.peer is not None else None
            if (
                partner is None
                or partner.behavior != AttackerKind.WORMHOLE
                or partner.peer != attacker.mote_id
            ):
                raise ValueError(
                    f"attackers[{index}].peer: wormhole peer {attacker.peer} "
                    f"has no reciprocal wormhole entry"
                )
        return value

    @model_validator(mode="after")
    def validate_references(self) -> Scenario:
        mote_ids = set(self.topology.mote_ids())
        sink = self.topology.sink_id
        if sink not in mote_ids:
            raise ValueError(f"topology.sink_id {sink} is not a mote")

        for index, attacker in enumerate(self.attackers):
            if attacker.mote_id not in mote_ids:
                raise ValueError(f"attackers[{index}].mote_id {attacker.mote_id} is not a mote")
            if attacker.mote_id == sink:
                raise ValueError(f"attackers[{index}].mote_id must not be the sink")

        max_data = MAX_WIRE_PAYLOAD
        if self.protocols.protection_mode != ProtectionMode.NONE:
            max_data -= TAG_SIZE
        for index, entry in enumerate(self.traffic):
            self._validate_traffic(index, entry, mote_ids=mote_ids, sink=sink, max_data=max_data)

        for index, rule in enumerate(self.losses):
            for mote_id in rule.link:
                if mote_id not in mote_ids:
                    raise ValueError(f"losses[{index}].link references unknown mote {mote_id}")

        if self.detection.probe_paths is not None:
            network = build_topology(self.topology, seed=self.seed)
            for index, path in enumerate(self.detection.probe_paths):
                if len(path) < 3 or path[0] != sink or path[-1] != sink:
                    raise ValueError(
                        f"detection.probe_paths[{index}] must start and end at the sink"
                    )
                for left, right in zip(path, path[1:], strict=False):
                    if left not in mote_ids or right not in mote_ids:
                        raise ValueError(
                            f"detection.probe_paths[{index}] references an unknown mote"
                        )
                    if not network.has_link(left, right):
                        raise ValueError(
                            f"detection.probe_paths[{index}] hop {left}->{right} "
                            "is not a radio link"
                        )
        return self

    def _validate_traffic(
        self,
        index: int,
        entry: TrafficEntry,
        *,
        mote_ids: set[int],
        sink: int,
        max_data: int,
    ) -> None:
        if entry.src not in mote_ids:
            raise ValueError(f"traffic[{index}].src {entry.src} is not a mote")
        if entry.kind == TrafficKind.BROADCAST:
            if entry.src != sink:
                raise ValueError(f"traffic[{index}].src must be the sink for broadcasts")
            if not self.protocols.mutesla.enabled:
                raise ValueError(f"traffic[{index}] broadcasts need protocols.mutesla.enabled")
            if entry.payload_size > MAX_BROADCAST_MESSAGE:
                raise ValueError(
                    f"traffic[{index}] broadcast message exceeds {MAX_BROADCAST_MESSAGE} bytes"
                )
            return

        dst = sink if entry.dst is None else entry.dst
        if dst not in mote_ids:
            raise ValueError(f"traffic[{index}].dst {dst} is not a mote")
        if dst == entry.src:
            raise ValueError(f"traffic[{index}].dst must differ from src")
        if entry.payload_size > max_data:
            raise ValueError(f"traffic[{index}] payload exceeds {max_data} bytes")

    def destination_of(self, entry: TrafficEntry) -> int:
        return self.topology.sink_id if entry.dst is None else entry.dst


def load_scenario(path: str | Path) -> Scenario:
    source = Path(path)
    data = source.read_bytes()
    try:
        raw = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data.count(b"\n", 0, exc.start) + 1
        column = exc.start - data.rfind(b"\n", 0, exc.start)
        raise ScenarioParseError(
            f"{source}:{line}:{column}: invalid UTF-8 byte 0x{data[exc.start]:02x}",
            line=line,
            column=column,
        ) from exc
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    if not isinstance(payload, dict):
        raise ScenarioParseError(f"{source}:1:1: scenario root must be an object", line=1, column=1)
    return build_scenario(payload)


def build_scenario(payload: dict[str, Any] | None = None) -> Scenario:
    try:
        return Scenario.model_validate(dict(payload or {}))
    except ValidationError as exc:
        errors = [(format_error_path(error["loc"]), error["msg"]) for error in exc.errors()]
        lines = "; ".join(f"{location}: {message}" for location, message in errors)
        raise ScenarioValidationError(f"invalid scenario: {lines}", errors=errors) from exc


def format_error_path(loc: tuple[int | str, ...]) -> str:
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else str(part)
    return path or "scenario"


def scenario_echo(scenario: Scenario) -> dict[str, Any]:
    return scenario.model_dump(mode="json")


def scenario_json_schema() -> dict[str, Any]:
    schema = json_schema_for(Scenario)
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema"
    return schema
