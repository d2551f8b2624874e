from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import StrEnum

from wsnguard_core.crypto import Key, hash_forward, mac, tags_match

from .chain import BroadcastPacket, ChainParams, broadcast_mac_input

logger = logging.getLogger(__name__)


class BadChainKey(ValueError):
    pass


class ReceiveStatus(StrEnum):
    BUFFERED = "buffered"
    DISCARDED = "discarded"


class DiscardReason(StrEnum):
    KEY_ALREADY_DISCLOSED = "key_already_disclosed"
    INVALID_INTERVAL = "invalid_interval"


@dataclass(slots=True, frozen=True)
class ReceiveOutcome:
    status: ReceiveStatus
    reason: DiscardReason | None = None

    @property
    def buffered(self) -> bool:
        return self.status == ReceiveStatus.BUFFERED


@dataclass(slots=True, frozen=True)
class BufferedBroadcast:
    packet: BroadcastPacket
    arrival_time: float


@dataclass(slots=True)
class ReceiverState:
    commitment_key: Key
    max_clock_error_eps: float
    last_verified_index: int = 0
    last_verified_key: Key | None = None
    buffer: list[BufferedBroadcast] = field(default_factory=list)
    rejected_count: int = 0

    def __post_init__(self) -> None:
        if self.max_clock_error_eps < 0:
            raise ValueError("max_clock_error_eps must be >= 0")
        if self.last_verified_key is None:
            self.last_verified_key = self.commitment_key


_BUFFERED = ReceiveOutcome(status=ReceiveStatus.BUFFERED)


def mt_receive(
    state: ReceiverState,
    packet: BroadcastPacket,
    params: ChainParams,
    arrival_time: float,
) -> ReceiveOutcome:
    """Buffer a broadcast only if its key cannot have been disclosed yet."""
    index = packet.interval_index
    if index < 1 or index > params.length_n:
        return ReceiveOutcome(ReceiveStatus.DISCARDED, DiscardReason.INVALID_INTERVAL)
    if index <= state.last_verified_index:
        return ReceiveOutcome(ReceiveStatus.DISCARDED, DiscardReason.KEY_ALREADY_DISCLOSED)

    if arrival_time + state.max_clock_error_eps >= params.disclosure_time(index):
        return ReceiveOutcome(ReceiveStatus.DISCARDED, DiscardReason.KEY_ALREADY_DISCLOSED)

    state.buffer.append(BufferedBroadcast(packet=packet, arrival_time=arrival_time))
    return _BUFFERED


def mt_on_disclosure(state: ReceiverState, disclosed_key: Key, interval_index: int) -> list[bytes]:
    if interval_index <= state.last_verified_index:
        raise BadChainKey(
            f"interval {interval_index} is not newer than verified {state.last_verified_index}"
        )

    candidate = disclosed_key
    for _ in range(interval_index - state.last_verified_index):
        candidate = hash_forward(candidate)
    if candidate != state.last_verified_key:
        raise BadChainKey(f"disclosed key for interval {interval_index} does not chain back")

    authenticated: list[bytes] = []
    kept: list[BufferedBroadcast] = []
    rejected = 0
    for entry in state.buffer:
        packet = entry.packet
        if packet.interval_index != interval_index:
            kept.append(entry)
            continue
        expected = mac(disclosed_key, broadcast_mac_input(interval_index, packet.message))
        if tags_match(expected, packet.tag):
            authenticated.append(packet.message)
        else:
            rejected += 1

    state.buffer = kept
    state.rejected_count += rejected
    state.last_verified_index = interval_index
    state.last_verified_key = disclosed_key
    if rejected:
        logger.debug(
            "mutesla dropped forged packets interval=%d count=%d", interval_index, rejected
        )
    return authenticated


def purge_unverifiable(state: ReceiverState) -> int:
    """Drop buffered packets whose interval was skipped by a later disclosure."""
    kept = [
        entry for entry in state.buffer if entry.packet.interval_index > state.last_verified_index
    ]
    purged = len(state.buffer) - len(kept)
    state.buffer = kept
    return purged
