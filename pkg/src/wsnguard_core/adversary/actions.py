from __future__ import annotations

from dataclasses import dataclass

from wsnguard_core.netsim.packets import WirePacket


@dataclass(slots=True, frozen=True)
class Forward:
    packet: WirePacket


@dataclass(slots=True, frozen=True)
class Drop:
    reason: str = "dropped"


@dataclass(slots=True, frozen=True)
class Modify:
    packet: WirePacket
    field: str = "payload"


@dataclass(slots=True, frozen=True)
class Tunnel:
    peer: int
    packet: WirePacket
    latency_ms: float


Action = Forward | Drop | Modify | Tunnel


def outgoing_packet(action: Action) -> WirePacket | None:
    if isinstance(action, Drop):
        return None
    return action.packet
