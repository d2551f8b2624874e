from __future__ import annotations

import logging
import struct

from wsnguard_core.netsim.packets import WirePacket
from wsnguard_core.netsim.topology import Network
from wsnguard_core.schemas import BROADCAST_ID, AttackerKind, PacketKind, Reliability

from .behaviors import AttackerConfig

logger = logging.getLogger(__name__)

_HELLO = struct.Struct(">HI")


class InvalidCount(ValueError):
    pass


def sybil_identities(
    attacker: AttackerConfig,
    k: int | None = None,
    *,
    network: Network,
) -> list[int]:
    """Identities the attacker answers for: configured victims first, then fresh ids."""
    count = attacker.identity_count if k is None else k
    if count < 2:
        raise InvalidCount(f"sybil identity count must be >= 2, got {count}")

    taken = set(network.mote_ids)
    for owner, claimed in network.identities.items():
        if owner != attacker.mote_id:
            taken.update(claimed)

    chosen: list[int] = []
    for victim in attacker.identities:
        if victim != attacker.mote_id and victim not in chosen:
            chosen.append(victim)
        if len(chosen) == count:
            return chosen

    candidate = max(taken | {attacker.mote_id}) + 1
    while len(chosen) < count:
        if candidate >= BROADCAST_ID:
            raise InvalidCount("no fresh identities left below the broadcast id")
        if candidate not in taken and candidate not in chosen:
            chosen.append(candidate)
        candidate += 1
    return chosen


def hello_flood(attacker: AttackerConfig, now: float, *, network: Network) -> list[WirePacket]:
    """One boosted-power hello to every live mote within `boosted_range_m`."""
    if attacker.behavior != AttackerKind.HELLO_FLOOD:
        return []
    if not network.mote(attacker.mote_id).alive or attacker.boosted_range_m <= 0:
        return []

    payload = _HELLO.pack(attacker.mote_id, int(now) & 0xFFFFFFFF)
    recipients = [
        mote_id
        for mote_id in network.within_range(attacker.mote_id, attacker.boosted_range_m)
        if network.mote(mote_id).alive
    ]
    return [
        WirePacket(
            src=attacker.mote_id,
            dst=mote_id,
            kind=PacketKind.HELLO,
            reliability=Reliability.UNRELIABLE,
            payload=payload,
        )
        for mote_id in recipients
    ]


def decode_hello(payload: bytes) -> tuple[int, int]:
    if len(payload) != _HELLO.size:
        raise ValueError(f"hello payload must be {_HELLO.size} bytes")
    identity, sent_at = _HELLO.unpack(payload)
    return identity, sent_at
