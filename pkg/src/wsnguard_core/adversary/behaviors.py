"""Attacker configuration and the per-packet policies malicious motes apply."""

from __future__ import annotations

import logging
import random
from collections.abc import Callable
from dataclasses import dataclass, field, replace

from pydantic import Field, field_validator, model_validator

from wsnguard_core.netsim.packets import MAX_WIRE_PAYLOAD, WirePacket
from wsnguard_core.routing.messages import (
    AodvReply,
    AodvRequest,
    DsrReply,
    DsrRequest,
    RouteMessage,
    decode_route_message,
)
from wsnguard_core.schemas import (
    AlterPolicy,
    AttackerKind,
    DTOBase,
    ModifyTarget,
    PacketKind,
)

from .actions import Action, Drop, Forward, Modify, Tunnel

logger = logging.getLogger(__name__)

DEFAULT_SEQ_BUMP = 100
DEFAULT_TUNNEL_LATENCY_MS = 1.0
DEFAULT_FLOOD_PERIOD_MS = 50.0

DATA_PLANE_KINDS = frozenset(
    {PacketKind.DATA, PacketKind.PROBE, PacketKind.BEACON, PacketKind.KEY_DISCLOSURE}
)


class AttackerConfig(DTOBase):
    mote_id: int = Field(ge=0)
    behavior: AttackerKind
    p: float = Field(default=0.0, ge=0.0, le=1.0)
    alter_policy: AlterPolicy = AlterPolicy.BIT_FLIP
    bit_flips: int = Field(default=1, ge=1, le=8 * MAX_WIRE_PAYLOAD)
    replacement_hex: str | None = None
    impersonate: int | None = Field(default=None, ge=0)
    advertised_hop_count: int = Field(default=0, ge=0, le=0xFF)
    advertised_seq_bump: int = Field(default=DEFAULT_SEQ_BUMP, ge=0)
    peer: int | None = Field(default=None, ge=0)
    tunnel_latency_ms: float = Field(default=DEFAULT_TUNNEL_LATENCY_MS, ge=0.0)
    identity_count: int = Field(default=2, ge=2)
    identities: list[int] = Field(default_factory=list)
    boosted_range_m: float = Field(default=0.0, ge=0.0)
    flood_period_ms: float = Field(default=DEFAULT_FLOOD_PERIOD_MS, gt=0.0)
    target_field: ModifyTarget | None = None
    seq_bump: int = Field(default=DEFAULT_SEQ_BUMP, ge=0)

    @field_validator("replacement_hex")
    @classmethod
    def validate_replacement(cls, value: str | None) -> str | None:
        if value is None:
            return None
        cleaned = value.strip().lower()
        try:
            raw = bytes.fromhex(cleaned)
        except ValueError as exc:
            raise ValueError("replacement_hex must be hex encoded") from exc
        if len(raw) > MAX_WIRE_PAYLOAD:
            raise ValueError(f"replacement_hex exceeds {MAX_WIRE_PAYLOAD} bytes")
        return cleaned

    @model_validator(mode="after")
    def validate_behavior(self) -> AttackerConfig:
        if self.behavior == AttackerKind.WORMHOLE:
            if self.peer is None:
                raise ValueError("wormhole attacker requires peer")
            if self.peer == self.mote_id:
                raise ValueError("wormhole peer must be another mote")
        if self.behavior == AttackerKind.FIELD_MODIFY and self.target_field is None:
            raise ValueError("field_modify attacker requires target_field")
        if self.alter_policy == AlterPolicy.REPLACE and self.replacement_hex is None:
            raise ValueError("replace alter_policy requires replacement_hex")
        if self.mote_id in self.identities:
            raise ValueError("identities must not include the attacker's own id")
        return self

    @property
    def replacement(self) -> bytes:
        return bytes.fromhex(self.replacement_hex or "")


@dataclass(slots=True)
class BehaviorContext:
    now_ms: float
    rng: random.Random


def apply_behavior(
    attacker: AttackerConfig, packet: WirePacket, context: BehaviorContext
) -> Action:
    behavior = attacker.behavior

    if behavior == AttackerKind.SELECTIVE_FORWARD:
        if packet.kind in DATA_PLANE_KINDS and context.rng.random() < attacker.p:
            return Drop(reason="selective_forward")
        return Forward(packet)

    if behavior == AttackerKind.WORMHOLE and attacker.peer is not None:
        return Tunnel(peer=attacker.peer, packet=packet, latency_ms=attacker.tunnel_latency_ms)

    if behavior == AttackerKind.SPOOF:
        if packet.kind not in DATA_PLANE_KINDS or not packet.payload:
            return Forward(packet)
        altered = alter_payload(packet.payload, attacker)
        if altered == packet.payload:
            return Forward(packet)
        return Modify(packet.with_payload(altered), field="payload")

    if packet.kind != PacketKind.ROUTE_CTL:
        return Forward(packet)

    if behavior == AttackerKind.SINKHOLE:
        return _rewrite_route(packet, attacker, _sinkhole_rewrite)
    if behavior == AttackerKind.FIELD_MODIFY:
        return _rewrite_route(packet, attacker, _field_rewrite)
    return Forward(packet)


def alter_payload(payload: bytes, attacker: AttackerConfig) -> bytes:
    if attacker.alter_policy == AlterPolicy.REPLACE:
        return attacker.replacement[:MAX_WIRE_PAYLOAD]
    altered = bytearray(payload)
    for bit in range(min(attacker.bit_flips, 8 * len(altered))):
        altered[-1 - bit // 8] ^= 1 << (bit % 8)
    return bytes(altered)


def truncate_route(route: tuple[int, ...], *, origin: int, splicer: int) -> tuple[int, ...]:
    """Drop every mote between the origin and the splicing attacker."""
    if splicer not in route or not route or route[0] != origin:
        return route
    return (origin, *route[route.index(splicer) :])


@dataclass(slots=True)
class AdversaryRoster:
    """Attackers keyed by mote id, each with its own seeded RNG."""

    attackers: dict[int, AttackerConfig] = field(default_factory=dict)
    seed: int = 0
    _rngs: dict[int, random.Random] = field(default_factory=dict)

    @classmethod
    def from_configs(cls, configs: list[AttackerConfig], *, seed: int) -> AdversaryRoster:
        roster = cls(attackers={config.mote_id: config for config in configs}, seed=seed)
        for mote_id in sorted(roster.attackers):
            roster._rngs[mote_id] = random.Random(f"{seed}:attacker:{mote_id}")
        return roster

    def __contains__(self, mote_id: object) -> bool:
        return mote_id in self.attackers

    @property
    def mote_ids(self) -> list[int]:
        return sorted(self.attackers)

    def of_kind(self, kind: AttackerKind) -> list[AttackerConfig]:
        return [
            self.attackers[mote_id]
            for mote_id in self.mote_ids
            if self.attackers[mote_id].behavior == kind
        ]

    def act(self, mote_id: int, packet: WirePacket, *, now_ms: float) -> Action:
        attacker = self.attackers.get(mote_id)
        if attacker is None:
            return Forward(packet)
        context = BehaviorContext(now_ms=now_ms, rng=self._rngs[mote_id])
        action = apply_behavior(attacker, packet, context)
        if not isinstance(action, Forward):
            logger.debug(
                "attacker action mote=%d kind=%s action=%s",
                mote_id,
                packet.kind.value,
                type(action).__name__,
            )
        return action

    def answers_for(self, mote_id: int, target: int, *, claimed: tuple[int, ...] = ()) -> bool:
        attacker = self.attackers.get(mote_id)
        if attacker is None:
            return False
        if attacker.behavior == AttackerKind.SPOOF and attacker.impersonate == target:
            return True
        return attacker.behavior == AttackerKind.SYBIL and target in claimed

    def forged_reply_seq(self, mote_id: int, dest_seq: int) -> int:
        attacker = self.attackers.get(mote_id)
        bump = attacker.advertised_seq_bump if attacker is not None else 0
        return min(dest_seq + bump, 0xFFFFFFFF)

    def advertised_hops(self) -> dict[int, int]:
        return {
            config.mote_id: config.advertised_hop_count
            for config in self.of_kind(AttackerKind.SINKHOLE)
        }

    def tunnels(self) -> list[tuple[int, int]]:
        pairs = {
            tuple(sorted((config.mote_id, config.peer)))
            for config in self.of_kind(AttackerKind.WORMHOLE)
            if config.peer is not None
        }
        return sorted(pairs)


_Rewrite = Callable[[RouteMessage, AttackerConfig], tuple[RouteMessage, str]]


def _rewrite_route(packet: WirePacket, attacker: AttackerConfig, rewrite: _Rewrite) -> Action:
    try:
        message = decode_route_message(packet.payload)
    except ValueError:
        return Forward(packet)
    rewritten, field_name = rewrite(message, attacker)
    if rewritten == message:
        return Forward(packet)
    return Modify(packet.with_payload(rewritten.encode()), field=field_name)


def _sinkhole_rewrite(
    message: RouteMessage, attacker: AttackerConfig
) -> tuple[RouteMessage, str]:
    bump = attacker.advertised_seq_bump
    hops = attacker.advertised_hop_count
    if isinstance(message, AodvRequest):
        forged = replace(message, origin_seq=_seq(message.origin_seq + bump), hop_count=hops)
        return forged, "advertised"
    if isinstance(message, AodvReply):
        forged = replace(message, dest_seq=_seq(message.dest_seq + bump), hop_count=hops)
        return forged, "advertised"
    return message, "none"


def _field_rewrite(message: RouteMessage, attacker: AttackerConfig) -> tuple[RouteMessage, str]:
    target = attacker.target_field
    if target is None:
        return message, "none"
    if target == ModifyTarget.SEQ_NO:
        if isinstance(message, AodvRequest):
            bumped = _seq(message.origin_seq + attacker.seq_bump)
            return replace(message, origin_seq=bumped), target.value
        if isinstance(message, AodvReply):
            bumped = _seq(message.dest_seq + attacker.seq_bump)
            return replace(message, dest_seq=bumped), target.value
    if target == ModifyTarget.HOP_COUNT and isinstance(message, AodvRequest | AodvReply):
        return replace(message, hop_count=0), target.value
    if target == ModifyTarget.SOURCE_ROUTE:
        if isinstance(message, DsrRequest):
            record = truncate_route(
                message.route_record, origin=message.origin, splicer=attacker.mote_id
            )
            return replace(message, route_record=record), target.value
        if isinstance(message, DsrReply):
            route = truncate_route(message.route, origin=message.origin, splicer=attacker.mote_id)
            return replace(message, route=route), target.value
    return message, "none"


def _seq(value: int) -> int:
    return min(value, 0xFFFFFFFF)
