"""Malicious mote policies: spoofing, dropping, sinkholes, wormholes, Sybil and hello floods."""

from .actions import Action, Drop, Forward, Modify, Tunnel, outgoing_packet
from .behaviors import (
    DATA_PLANE_KINDS,
    AdversaryRoster,
    AttackerConfig,
    BehaviorContext,
    alter_payload,
    apply_behavior,
    truncate_route,
)
from .identities import InvalidCount, decode_hello, hello_flood, sybil_identities

__all__ = [
    "Action",
    "AdversaryRoster",
    "AttackerConfig",
    "BehaviorContext",
    "DATA_PLANE_KINDS",
    "Drop",
    "Forward",
    "InvalidCount",
    "Modify",
    "Tunnel",
    "alter_payload",
    "apply_behavior",
    "decode_hello",
    "hello_flood",
    "outgoing_packet",
    "sybil_identities",
    "truncate_route",
]
