from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

from wsnguard_core.crypto import KEY_SIZE, TAG_SIZE, Key, Tag, hash_forward, mac

logger = logging.getLogger(__name__)

DEFAULT_INTERVAL_MS = 500
DEFAULT_DISCLOSURE_DELAY = 2
DEFAULT_MAX_CLOCK_ERROR_MS = 50
DEFAULT_CHAIN_LENGTH = 200

_INDEX = struct.Struct(">I")


class ChainExpired(ValueError):
    pass


@dataclass(slots=True, frozen=True)
class ChainParams:
    """The public half of a chain: what every receiver is told at deployment."""

    length_n: int
    interval_len: float
    disclosure_delay_d: int
    start_time: float

    def __post_init__(self) -> None:
        if self.length_n < 1:
            raise ValueError("length_n must be >= 1")
        if self.interval_len <= 0:
            raise ValueError("interval_len must be > 0")
        if self.disclosure_delay_d < 1:
            raise ValueError("disclosure_delay_d must be >= 1")

    def disclosure_time(self, interval_index: int) -> float:
        return self.start_time + (interval_index - 1 + self.disclosure_delay_d) * self.interval_len

    def interval_at(self, now: float) -> int:
        return int((now - self.start_time) // self.interval_len) + 1


@dataclass(slots=True)
class KeyChain:
    params: ChainParams
    keys: tuple[Key, ...]
    last_disclosed_index: int = 0

    @property
    def length_n(self) -> int:
        return self.params.length_n

    @property
    def commitment(self) -> Key:
        return self.keys[0]

    def key_at(self, interval_index: int) -> Key:
        if not 0 <= interval_index <= self.params.length_n:
            raise ChainExpired(f"interval {interval_index} is outside the chain")
        return self.keys[interval_index]


@dataclass(slots=True, frozen=True)
class BroadcastPacket:
    message: bytes
    interval_index: int
    tag: Tag


@dataclass(slots=True, frozen=True)
class DisclosedKey:
    key: Key
    interval_index: int


def generate_chain(
    seed: Key,
    n: int,
    *,
    interval_len: float = DEFAULT_INTERVAL_MS,
    d: int = DEFAULT_DISCLOSURE_DELAY,
    start_time: float = 0,
) -> KeyChain:
    if seed.is_weak:
        logger.warning("weak key chain seed n=%d", n)
    params = ChainParams(
        length_n=n,
        interval_len=interval_len,
        disclosure_delay_d=d,
        start_time=start_time,
    )
    # built from K_n down to K_0, stored low index first
    descending = [hash_forward(seed)]
    for _ in range(n):
        descending.append(hash_forward(descending[-1]))
    keys = tuple(reversed(descending))
    logger.debug("generated key chain n=%d commitment=%s", n, keys[0].hex())
    return KeyChain(params=params, keys=keys)


def mt_broadcast(chain: KeyChain, message: bytes, now: float) -> BroadcastPacket:
    params = chain.params
    end = params.start_time + params.length_n * params.interval_len
    if now < params.start_time or now >= end:
        raise ChainExpired(f"time {now} is outside the chain window [{params.start_time}, {end})")

    interval_index = params.interval_at(now)
    message = bytes(message)
    tag = mac(chain.key_at(interval_index), broadcast_mac_input(interval_index, message))
    return BroadcastPacket(message=message, interval_index=interval_index, tag=tag)


def mt_disclose(chain: KeyChain, now: float) -> DisclosedKey | None:
    params = chain.params
    newest = params.interval_at(now) - params.disclosure_delay_d
    newest = min(newest, params.length_n)
    if newest < 1 or newest <= chain.last_disclosed_index:
        return None

    chain.last_disclosed_index = newest
    return DisclosedKey(key=chain.key_at(newest), interval_index=newest)


def broadcast_mac_input(interval_index: int, message: bytes) -> bytes:
    return _INDEX.pack(interval_index) + message


def encode_broadcast(packet: BroadcastPacket) -> bytes:
    return _INDEX.pack(packet.interval_index) + packet.message + packet.tag.value


def decode_broadcast(data: bytes) -> BroadcastPacket:
    if len(data) < _INDEX.size + TAG_SIZE:
        raise ValueError("broadcast packet too short")
    (interval_index,) = _INDEX.unpack_from(data)
    return BroadcastPacket(
        message=bytes(data[_INDEX.size : -TAG_SIZE]),
        interval_index=interval_index,
        tag=Tag(data[-TAG_SIZE:]),
    )


def encode_disclosure(disclosed: DisclosedKey) -> bytes:
    return _INDEX.pack(disclosed.interval_index) + disclosed.key.material


def decode_disclosure(data: bytes) -> DisclosedKey:
    if len(data) != _INDEX.size + KEY_SIZE:
        raise ValueError("key disclosure must be exactly 20 bytes")
    (interval_index,) = _INDEX.unpack_from(data)
    return DisclosedKey(key=Key(data[_INDEX.size :]), interval_index=interval_index)
