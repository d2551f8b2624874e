"""Byte layouts of route-control payloads (all integers big-endian).

AODV request  0x01 | origin u16 | target u16 | request_id u16 | origin_seq u32 | dest_seq u32
              | hop u8
AODV reply    0x02 | origin u16 | target u16 | request_id u16 | dest_seq u32 | hop u8
              | lifetime_ms u32
DSR request   0x11 | origin u16 | target u16 | request_id u16 | count u8 | route u16 * count
DSR reply     0x12 | origin u16 | target u16 | request_id u16 | count u8 | route u16 * count
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

AODV_REQUEST = 0x01
AODV_REPLY = 0x02
DSR_REQUEST = 0x11
DSR_REPLY = 0x12

MAX_ROUTE_LENGTH = 28

_AODV_REQUEST = struct.Struct(">BHHHIIB")
_AODV_REPLY = struct.Struct(">BHHHIBI")
_DSR_HEAD = struct.Struct(">BHHHB")


@dataclass(slots=True, frozen=True)
class AodvRequest:
    origin: int
    target: int
    request_id: int
    origin_seq: int
    dest_seq: int
    hop_count: int = 0

    def advanced(self) -> AodvRequest:
        return replace(self, hop_count=min(self.hop_count + 1, 0xFF))

    def encode(self) -> bytes:
        return _AODV_REQUEST.pack(
            AODV_REQUEST,
            self.origin,
            self.target,
            self.request_id,
            self.origin_seq,
            self.dest_seq,
            self.hop_count,
        )


@dataclass(slots=True, frozen=True)
class AodvReply:
    origin: int
    target: int
    request_id: int
    dest_seq: int
    hop_count: int
    lifetime_ms: int

    def advanced(self) -> AodvReply:
        return replace(self, hop_count=min(self.hop_count + 1, 0xFF))

    def encode(self) -> bytes:
        return _AODV_REPLY.pack(
            AODV_REPLY,
            self.origin,
            self.target,
            self.request_id,
            self.dest_seq,
            self.hop_count,
            self.lifetime_ms,
        )


@dataclass(slots=True, frozen=True)
class DsrRequest:
    origin: int
    target: int
    request_id: int
    route_record: tuple[int, ...]

    def appended(self, mote_id: int) -> DsrRequest:
        return replace(self, route_record=(*self.route_record, mote_id))

    def encode(self) -> bytes:
        return _encode_dsr(
            DSR_REQUEST, self.origin, self.target, self.request_id, self.route_record
        )


@dataclass(slots=True, frozen=True)
class DsrReply:
    origin: int
    target: int
    request_id: int
    route: tuple[int, ...]

    def encode(self) -> bytes:
        return _encode_dsr(DSR_REPLY, self.origin, self.target, self.request_id, self.route)


RouteMessage = AodvRequest | AodvReply | DsrRequest | DsrReply


def decode_route_message(data: bytes) -> RouteMessage:
    if not data:
        raise ValueError("empty route-control payload")
    code = data[0]
    if code == AODV_REQUEST:
        _require_length(data, _AODV_REQUEST.size)
        _, origin, target, request_id, origin_seq, dest_seq, hop = _AODV_REQUEST.unpack(data)
        return AodvRequest(origin, target, request_id, origin_seq, dest_seq, hop)
    if code == AODV_REPLY:
        _require_length(data, _AODV_REPLY.size)
        _, origin, target, request_id, dest_seq, hop, lifetime = _AODV_REPLY.unpack(data)
        return AodvReply(origin, target, request_id, dest_seq, hop, lifetime)
    if code in (DSR_REQUEST, DSR_REPLY):
        if len(data) < _DSR_HEAD.size:
            raise ValueError("truncated dsr route-control payload")
        _, origin, target, request_id, count = _DSR_HEAD.unpack_from(data)
        _require_length(data, _DSR_HEAD.size + 2 * count)
        route = struct.unpack_from(f">{count}H", data, _DSR_HEAD.size)
        if code == DSR_REQUEST:
            return DsrRequest(origin, target, request_id, tuple(route))
        return DsrReply(origin, target, request_id, tuple(route))
    raise ValueError(f"unknown route-control code: {code:#04x}")


def _encode_dsr(
    code: int, origin: int, target: int, request_id: int, route: tuple[int, ...]
) -> bytes:
    if len(route) > MAX_ROUTE_LENGTH:
        raise ValueError(f"route of {len(route)} motes exceeds {MAX_ROUTE_LENGTH}")
    head = _DSR_HEAD.pack(code, origin, target, request_id, len(route))
    return head + struct.pack(f">{len(route)}H", *route)


def _require_length(data: bytes, expected: int) -> None:
    if len(data) != expected:
        raise ValueError(f"route-control payload must be {expected} bytes, got {len(data)}")
