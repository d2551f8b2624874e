"""Simulation-grade keyed primitives.

Every output is built from one 64-bit multiply-xor-shift finalizer iterated over 8-byte
big-endian input blocks. The key's two words are folded in before, between and after two
passes over the blocks. A single prefix byte separates the four uses:

    0x00 prf, 0x01 mac, 0x02 keystream, 0x03 hash_forward

Nothing here is secure against a real adversary. It is deterministic across platforms,
which is the only property the simulator depends on.
"""

from __future__ import annotations

import hmac
import random
import struct
from dataclasses import dataclass

KEY_SIZE = 16
TAG_SIZE = 8
MAX_COUNTER = (1 << 64) - 1

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FMIX_C1 = 0xFF51AFD7ED558CCD
_FMIX_C2 = 0xC4CEB9FE1A85EC53

_PREFIX_PRF = b"\x00"
_PREFIX_MAC = b"\x01"
_PREFIX_KEYSTREAM = b"\x02"
_PREFIX_HASH_FORWARD = b"\x03"


class InvalidKey(ValueError):
    pass


@dataclass(slots=True, frozen=True)
class Key:
    material: bytes

    def __post_init__(self) -> None:
        material = bytes(self.material)
        if len(material) != KEY_SIZE:
            raise InvalidKey(f"key material must be exactly {KEY_SIZE} bytes, got {len(material)}")
        object.__setattr__(self, "material", material)

    @property
    def is_weak(self) -> bool:
        return not any(self.material)

    @classmethod
    def from_hex(cls, value: str) -> Key:
        try:
            return cls(bytes.fromhex(value))
        except ValueError as exc:
            raise InvalidKey(f"invalid key hex: {exc}") from exc

    @classmethod
    def random(cls, rng: random.Random) -> Key:
        return cls(rng.randbytes(KEY_SIZE))

    def hex(self) -> str:
        return self.material.hex()


@dataclass(slots=True, frozen=True)
class Tag:
    value: bytes

    def __post_init__(self) -> None:
        value = bytes(self.value)
        if len(value) != TAG_SIZE:
            raise ValueError(f"tag must be exactly {TAG_SIZE} bytes, got {len(value)}")
        object.__setattr__(self, "value", value)

    def __len__(self) -> int:
        return TAG_SIZE

    def __bytes__(self) -> bytes:
        return self.value


def prf(key: Key, data: bytes) -> Tag:
    return Tag(struct.pack(">Q", _keyed_word(key, _PREFIX_PRF + bytes(data))))


def mac(key: Key, message: bytes) -> Tag:
    return Tag(struct.pack(">Q", _keyed_word(key, _PREFIX_MAC + bytes(message))))


def keystream(key: Key, counter: int, length: int) -> bytes:
    if length < 0:
        raise ValueError("length must be >= 0")
    if not 0 <= counter <= MAX_COUNTER:
        raise ValueError("counter must fit in 64 bits")

    words = (length + 7) // 8
    stream = b"".join(
        struct.pack(
            ">Q",
            _keyed_word(key, _PREFIX_KEYSTREAM + struct.pack(">QQ", counter, index)),
        )
        for index in range(words)
    )
    return stream[:length]


def hash_forward(key: Key) -> Key:
    high = _keyed_word(key, _PREFIX_HASH_FORWARD, lane=1)
    low = _keyed_word(key, _PREFIX_HASH_FORWARD, lane=2)
    return Key(struct.pack(">QQ", high, low))


def derive_key(master: Key, label: bytes) -> Key:
    high = prf(master, b"derive:" + label + b"\x00")
    low = prf(master, b"derive:" + label + b"\x01")
    return Key(high.value + low.value)


def tags_match(left: Tag, right: Tag) -> bool:
    return hmac.compare_digest(left.value, right.value)


def _fmix64(value: int) -> int:
    value ^= value >> 33
    value = (value * _FMIX_C1) & _MASK64
    value ^= value >> 33
    value = (value * _FMIX_C2) & _MASK64
    value ^= value >> 33
    return value


def _keyed_word(key: Key, data: bytes, *, lane: int = 0) -> int:
    key_high, key_low = struct.unpack(">QQ", key.material)
    blocks = _blocks(data)

    state = (key_high ^ (_GOLDEN * (lane + 1))) & _MASK64
    for block in blocks:
        state = _fmix64(state ^ block)

    # second pass, with the low key word folded in between the rounds
    state = _fmix64(state ^ key_low)
    for block in blocks:
        state = _fmix64((state + block) & _MASK64)

    return _fmix64(state ^ key_high ^ len(data))


def _blocks(data: bytes) -> tuple[int, ...]:
    padded_length = max(8, (len(data) + 7) // 8 * 8)
    padded = data.ljust(padded_length, b"\x00")
    return struct.unpack(f">{padded_length // 8}Q", padded)
