from __future__ import annotations

import struct
from dataclasses import dataclass, replace

from wsnguard_core.schemas import BROADCAST_ID, PacketKind, Reliability

HEADER_BYTES = 8
MAX_WIRE_PAYLOAD = 64
DEFAULT_HOP_TTL = 32

_HEADER = struct.Struct(">HHBBBB")
_FLAG_RELIABLE = 0x01
_KIND_CODES: dict[PacketKind, int] = {
    PacketKind.DATA: 1,
    PacketKind.ROUTE_CTL: 2,
    PacketKind.BEACON: 3,
    PacketKind.PROBE: 4,
    PacketKind.KEY_DISCLOSURE: 5,
    PacketKind.HELLO: 6,
}
_KINDS_BY_CODE = {code: kind for kind, code in _KIND_CODES.items()}


@dataclass(slots=True, frozen=True)
class WirePacket:
    src: int
    dst: int
    kind: PacketKind
    reliability: Reliability
    payload: bytes = b""
    hop_ttl: int = DEFAULT_HOP_TTL

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload", bytes(self.payload))
        if len(self.payload) > MAX_WIRE_PAYLOAD:
            raise ValueError(
                f"payload of {len(self.payload)} bytes exceeds wire max {MAX_WIRE_PAYLOAD}"
            )
        if not 0 <= self.hop_ttl <= 0xFF:
            raise ValueError("hop_ttl must fit in one byte")
        for name, value in (("src", self.src), ("dst", self.dst)):
            if not 0 <= value <= BROADCAST_ID:
                raise ValueError(f"{name} must be a 16-bit mote id")

    @property
    def is_broadcast(self) -> bool:
        return self.dst == BROADCAST_ID

    @property
    def size_bytes(self) -> int:
        return HEADER_BYTES + len(self.payload)

    @property
    def on_air_bits(self) -> int:
        return 8 * self.size_bytes

    def with_payload(self, payload: bytes) -> WirePacket:
        return replace(self, payload=payload)

    def hop(self) -> WirePacket | None:
        """The packet as the next hop sees it, or None once the ttl is spent."""
        if self.hop_ttl <= 1:
            return None
        return replace(self, hop_ttl=self.hop_ttl - 1)

    def encode(self) -> bytes:
        flags = _FLAG_RELIABLE if self.reliability == Reliability.RELIABLE else 0
        header = _HEADER.pack(
            self.src,
            self.dst,
            _KIND_CODES[self.kind],
            flags,
            self.hop_ttl,
            len(self.payload),
        )
        return header + self.payload

    @classmethod
    def decode(cls, data: bytes) -> WirePacket:
        if len(data) < HEADER_BYTES:
            raise ValueError("wire packet shorter than its header")
        src, dst, kind_code, flags, ttl, length = _HEADER.unpack_from(data)
        payload = data[HEADER_BYTES:]
        if len(payload) != length:
            raise ValueError(f"length field {length} does not match payload {len(payload)}")
        kind = _KINDS_BY_CODE.get(kind_code)
        if kind is None:
            raise ValueError(f"unknown packet kind code: {kind_code}")
        reliability = Reliability.RELIABLE if flags & _FLAG_RELIABLE else Reliability.UNRELIABLE
        return cls(
            src=src,
            dst=dst,
            kind=kind,
            reliability=reliability,
            payload=payload,
            hop_ttl=ttl,
        )
