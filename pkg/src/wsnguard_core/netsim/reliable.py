from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import StrEnum

from pydantic import Field, model_validator

from wsnguard_core.schemas import DTOBase, Reliability

from .energy import Direction, EnergyLedger, EnergyModel, charge_radio
from .packets import WirePacket
from .topology import Mote

logger = logging.getLogger(__name__)

DEFAULT_MAX_RETRIES = 3
DEFAULT_ACK_TIMEOUT_MS = 100.0
DEFAULT_HOP_LATENCY_MS = 5.0


class LossRule(DTOBase):
    link: tuple[int, int]
    drop_first: int = Field(default=0, ge=0)
    drop_all: bool = False

    @model_validator(mode="after")
    def validate_link(self) -> LossRule:
        if self.link[0] == self.link[1]:
            raise ValueError("loss rule link must join two different motes")
        return self


@dataclass(slots=True)
class LossScript:
    """Scripted link losses; attempts are counted per undirected link across the run."""

    rules: dict[frozenset[int], LossRule] = field(default_factory=dict)
    _attempts: defaultdict[frozenset[int], int] = field(
        default_factory=lambda: defaultdict(int)
    )

    @classmethod
    def from_rules(cls, rules: Iterable[LossRule]) -> LossScript:
        return cls(rules={frozenset(rule.link): rule for rule in rules})

    def delivers(self, sender: int, receiver: int) -> bool:
        key = frozenset((sender, receiver))
        rule = self.rules.get(key)
        if rule is None:
            return True
        self._attempts[key] += 1
        if rule.drop_all:
            return False
        return self._attempts[key] > rule.drop_first


@dataclass(slots=True, frozen=True)
class ReliabilityPolicy:
    max_retries: int = DEFAULT_MAX_RETRIES
    ack_timeout_ms: float = DEFAULT_ACK_TIMEOUT_MS

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.ack_timeout_ms <= 0:
            raise ValueError("ack_timeout_ms must be > 0")


class HopStatus(StrEnum):
    DELIVERED = "delivered"
    FAILED = "failed"


@dataclass(slots=True, frozen=True)
class HopOutcome:
    status: HopStatus
    transmissions: int
    elapsed_ms: float

    @property
    def delivered(self) -> bool:
        return self.status == HopStatus.DELIVERED


def send_reliable(
    mote: Mote,
    packet: WirePacket,
    *,
    receiver: Mote,
    model: EnergyModel,
    ledger: EnergyLedger | None = None,
    losses: LossScript | None = None,
    policy: ReliabilityPolicy = ReliabilityPolicy(),
    hop_latency_ms: float = DEFAULT_HOP_LATENCY_MS,
) -> HopOutcome:
    """One hop with per-hop acknowledgment and up to `max_retries` retransmissions."""
    if packet.reliability != Reliability.RELIABLE:
        raise ValueError("send_reliable requires a reliable packet")

    transmissions = 0
    elapsed = 0.0
    for _ in range(1 + policy.max_retries):
        if not mote.alive:
            break
        charge_radio(mote, packet.on_air_bits, Direction.TX, model=model, ledger=ledger)
        transmissions += 1
        if _lands(mote, receiver, losses):
            charge_radio(receiver, packet.on_air_bits, Direction.RX, model=model, ledger=ledger)
            return HopOutcome(HopStatus.DELIVERED, transmissions, elapsed + hop_latency_ms)
        elapsed += policy.ack_timeout_ms

    logger.debug(
        "reliable hop failed src=%d dst=%d transmissions=%d", mote.id, receiver.id, transmissions
    )
    return HopOutcome(HopStatus.FAILED, transmissions, elapsed)


def send_unreliable(
    mote: Mote,
    packet: WirePacket,
    *,
    receiver: Mote,
    model: EnergyModel,
    ledger: EnergyLedger | None = None,
    losses: LossScript | None = None,
    hop_latency_ms: float = DEFAULT_HOP_LATENCY_MS,
) -> HopOutcome:
    if not mote.alive:
        return HopOutcome(HopStatus.FAILED, 0, 0.0)
    charge_radio(mote, packet.on_air_bits, Direction.TX, model=model, ledger=ledger)
    if _lands(mote, receiver, losses):
        charge_radio(receiver, packet.on_air_bits, Direction.RX, model=model, ledger=ledger)
        return HopOutcome(HopStatus.DELIVERED, 1, hop_latency_ms)
    return HopOutcome(HopStatus.FAILED, 1, hop_latency_ms)


def transmit_hop(
    mote: Mote,
    packet: WirePacket,
    *,
    receiver: Mote,
    model: EnergyModel,
    ledger: EnergyLedger | None = None,
    losses: LossScript | None = None,
    policy: ReliabilityPolicy = ReliabilityPolicy(),
    hop_latency_ms: float = DEFAULT_HOP_LATENCY_MS,
) -> HopOutcome:
    if packet.reliability == Reliability.RELIABLE:
        return send_reliable(
            mote,
            packet,
            receiver=receiver,
            model=model,
            ledger=ledger,
            losses=losses,
            policy=policy,
            hop_latency_ms=hop_latency_ms,
        )
    return send_unreliable(
        mote,
        packet,
        receiver=receiver,
        model=model,
        ledger=ledger,
        losses=losses,
        hop_latency_ms=hop_latency_ms,
    )


def _lands(sender: Mote, receiver: Mote, losses: LossScript | None) -> bool:
    if not receiver.alive:
        return False
    return losses is None or losses.delivers(sender.id, receiver.id)
