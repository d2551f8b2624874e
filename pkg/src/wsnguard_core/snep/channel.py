from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

from wsnguard_core.crypto import (
    MAX_COUNTER,
    TAG_SIZE,
    Key,
    Tag,
    derive_key,
    keystream,
    mac,
    tags_match,
)
from wsnguard_core.schemas import ProtectionMode

logger = logging.getLogger(__name__)

DEFAULT_MAX_PAYLOAD_BYTES = 64
DEFAULT_RECEIVE_WINDOW = 16

_RESYNC_LABEL = b"RESYNC"


class SnepError(ValueError):
    pass


class PayloadTooLarge(SnepError):
    pass


class CounterExhausted(SnepError):
    pass


class MacMismatch(SnepError):
    pass


class StaleCounter(SnepError):
    pass


@dataclass(slots=True)
class SnepChannel:
    """One mote's view of a pairwise channel: `peer_a` is the local end, `peer_b` the remote."""

    peer_a: int
    peer_b: int
    enc_key: Key
    mac_key: Key
    counter_send: int = 0
    counter_recv: int = 0
    protection_mode: ProtectionMode = ProtectionMode.AUTH_ENC
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD_BYTES
    skipped: set[int] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.enc_key == self.mac_key:
            raise ValueError("enc_key and mac_key must be independent")
        if self.max_payload_bytes < 0:
            raise ValueError("max_payload_bytes must be >= 0")
        if not 0 <= self.counter_send <= MAX_COUNTER:
            raise ValueError("counter_send must fit in 64 bits")
        if not 0 <= self.counter_recv <= MAX_COUNTER:
            raise ValueError("counter_recv must fit in 64 bits")


@dataclass(slots=True, frozen=True)
class SecuredPayload:
    body: bytes
    tag: Tag | None = None

    @property
    def size(self) -> int:
        return len(self.body) + (TAG_SIZE if self.tag is not None else 0)

    def to_wire(self) -> bytes:
        if self.tag is None:
            return self.body
        return self.body + self.tag.value

    @classmethod
    def from_wire(cls, data: bytes, *, protection_mode: ProtectionMode) -> SecuredPayload:
        if protection_mode == ProtectionMode.NONE:
            return cls(body=bytes(data))
        if len(data) < TAG_SIZE:
            raise MacMismatch("secured payload shorter than its tag")
        return cls(body=bytes(data[:-TAG_SIZE]), tag=Tag(data[-TAG_SIZE:]))


def open_channel_pair(
    *,
    mote_a: int,
    mote_b: int,
    master_key: Key,
    protection_mode: ProtectionMode = ProtectionMode.AUTH_ENC,
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD_BYTES,
) -> tuple[SnepChannel, SnepChannel]:
    """Both ends of one pairwise channel, keys derived from a deployment-time master key."""
    if master_key.is_weak:
        logger.warning("weak master key for channel mote_a=%d mote_b=%d", mote_a, mote_b)
    enc_key = derive_key(master_key, b"snep-enc")
    mac_key = derive_key(master_key, b"snep-mac")
    side_a = SnepChannel(
        peer_a=mote_a,
        peer_b=mote_b,
        enc_key=enc_key,
        mac_key=mac_key,
        protection_mode=protection_mode,
        max_payload_bytes=max_payload_bytes,
    )
    side_b = SnepChannel(
        peer_a=mote_b,
        peer_b=mote_a,
        enc_key=enc_key,
        mac_key=mac_key,
        protection_mode=protection_mode,
        max_payload_bytes=max_payload_bytes,
    )
    return side_a, side_b


def snep_send(channel: SnepChannel, plaintext: bytes) -> SecuredPayload:
    plaintext = bytes(plaintext)
    if len(plaintext) > channel.max_payload_bytes:
        raise PayloadTooLarge(
            f"plaintext of {len(plaintext)} bytes exceeds max {channel.max_payload_bytes}"
        )

    if channel.protection_mode == ProtectionMode.NONE:
        return SecuredPayload(body=plaintext)

    if channel.counter_send >= MAX_COUNTER:
        raise CounterExhausted(
            f"send counter exhausted on channel {channel.peer_a}->{channel.peer_b}"
        )

    counter = channel.counter_send
    if channel.protection_mode == ProtectionMode.AUTH_ENC:
        body = _xor(plaintext, keystream(channel.enc_key, counter, len(plaintext)))
    else:
        body = plaintext
    tag = mac(channel.mac_key, _mac_input(counter=counter, sender=channel.peer_a, body=body))
    channel.counter_send = counter + 1
    return SecuredPayload(body=body, tag=tag)


def snep_receive(channel: SnepChannel, payload: SecuredPayload, claimed_counter: int) -> bytes:
    if channel.protection_mode == ProtectionMode.NONE:
        return payload.body

    if claimed_counter < channel.counter_recv:
        raise StaleCounter(
            f"counter {claimed_counter} is below expected {channel.counter_recv}"
        )
    if claimed_counter > MAX_COUNTER:
        raise CounterExhausted("claimed counter does not fit in 64 bits")
    if not _verifies(channel, payload, claimed_counter):
        raise MacMismatch(f"tag verification failed at counter {claimed_counter}")

    channel.counter_recv = claimed_counter + 1
    return _open_body(channel, payload, claimed_counter)


def snep_receive_window(
    channel: SnepChannel,
    payload: SecuredPayload,
    *,
    window: int = DEFAULT_RECEIVE_WINDOW,
) -> tuple[bytes, int]:
    """Receive without knowing how many packets were lost in between.

    Tries counters `counter_recv .. counter_recv + window`. Counters jumped over stay open for a
    late arrival within `window`; any other payload that verifies below `counter_recv` is a replay.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    if channel.protection_mode == ProtectionMode.NONE:
        return payload.body, channel.counter_recv

    start = channel.counter_recv
    for candidate in range(start, min(start + window, MAX_COUNTER) + 1):
        if _verifies(channel, payload, candidate):
            if candidate > start:
                logger.debug(
                    "snep resync from window peer=%d skipped=%d", channel.peer_b, candidate - start
                )
                channel.skipped.update(range(start, candidate))
            channel.counter_recv = candidate + 1
            if channel.skipped:
                floor = channel.counter_recv - window
                channel.skipped = {counter for counter in channel.skipped if counter >= floor}
            return _open_body(channel, payload, candidate), candidate

    for candidate in range(start - 1, max(start - window, 0) - 1, -1):
        if _verifies(channel, payload, candidate):
            if candidate in channel.skipped:
                channel.skipped.discard(candidate)
                logger.debug("snep late arrival peer=%d counter=%d", channel.peer_b, candidate)
                return _open_body(channel, payload, candidate), candidate
            raise StaleCounter(f"payload replays counter {candidate}")

    raise MacMismatch(f"no counter in [{start}, {start + window}] verifies")


def resync_proof(mac_key: Key, peer_counter_claim: int) -> Tag:
    return mac(mac_key, _RESYNC_LABEL + struct.pack(">Q", peer_counter_claim))


def counter_resync(channel: SnepChannel, peer_counter_claim: int, proof: Tag) -> SnepChannel:
    if not 0 <= peer_counter_claim <= MAX_COUNTER:
        raise ValueError("peer_counter_claim must fit in 64 bits")
    expected = resync_proof(channel.mac_key, peer_counter_claim)
    if not tags_match(expected, proof):
        raise MacMismatch("resync proof does not verify")

    if peer_counter_claim > channel.counter_recv:
        logger.info(
            "snep counter resync peer=%d from=%d to=%d",
            channel.peer_b,
            channel.counter_recv,
            peer_counter_claim,
        )
        channel.counter_recv = peer_counter_claim
    return channel


def _verifies(channel: SnepChannel, payload: SecuredPayload, counter: int) -> bool:
    if payload.tag is None:
        return False
    expected = mac(
        channel.mac_key,
        _mac_input(counter=counter, sender=channel.peer_b, body=payload.body),
    )
    return tags_match(expected, payload.tag)


def _open_body(channel: SnepChannel, payload: SecuredPayload, counter: int) -> bytes:
    if channel.protection_mode == ProtectionMode.AUTH_ENC:
        return _xor(payload.body, keystream(channel.enc_key, counter, len(payload.body)))
    return payload.body


def _mac_input(*, counter: int, sender: int, body: bytes) -> bytes:
    return struct.pack(">QH", counter, sender) + body


def _xor(left: bytes, right: bytes) -> bytes:
    return bytes(a ^ b for a, b in zip(left, right, strict=True))
