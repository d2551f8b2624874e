from __future__ import annotations

import logging
import random

import pytest

from wsnguard_core.crypto.primitives import KEY_SIZE, TAG_SIZE, Key
from wsnguard_core.schemas import ProtectionMode
from wsnguard_core.snep.channel import (
    MacMismatch,
    PayloadTooLarge,
    SecuredPayload,
    SnepChannel,
    StaleCounter,
    counter_resync,
    open_channel_pair,
    resync_proof,
    snep_receive,
    snep_receive_window,
    snep_send,
)


def _pair(
    mode: ProtectionMode = ProtectionMode.AUTH_ENC, *, seed: int = 1
) -> tuple[SnepChannel, SnepChannel]:
    return open_channel_pair(
        mote_a=1,
        mote_b=2,
        master_key=Key.random(random.Random(seed)),
        protection_mode=mode,
    )


def _flip(data: bytes, bit: int) -> bytes:
    flipped = bytearray(data)
    flipped[bit // 8] ^= 1 << (bit % 8)
    return bytes(flipped)


@pytest.mark.parametrize("mode", [ProtectionMode.AUTH_ENC, ProtectionMode.AUTH_ONLY])
def test_overhead_is_exactly_one_tag(mode: ProtectionMode) -> None:
    rng = random.Random(11)
    sender, _ = _pair(mode)

    for _ in range(1_000):
        plaintext = rng.randbytes(rng.randrange(0, 65))
        secured = snep_send(sender, plaintext)
        assert secured.size - len(plaintext) == TAG_SIZE
        assert len(secured.to_wire()) == len(plaintext) + 8


def test_twenty_byte_reading_becomes_twenty_eight_bytes() -> None:
    sender, _ = _pair()

    assert snep_send(sender, b"r" * 20).size == 28


def test_none_mode_is_a_passthrough() -> None:
    sender, receiver = _pair(ProtectionMode.NONE)

    secured = snep_send(sender, b"")
    assert secured.body == b""
    assert secured.tag is None
    assert snep_receive(receiver, snep_send(sender, b"plain"), 0) == b"plain"
    assert sender.counter_send == 0


def test_identical_plaintexts_encrypt_differently() -> None:
    sender, _ = _pair()
    plaintext = bytes(range(16))

    for _ in range(1_000):
        first = snep_send(sender, plaintext)
        second = snep_send(sender, plaintext)
        assert first.body != second.body


def test_auth_only_leaves_body_readable() -> None:
    sender, receiver = _pair(ProtectionMode.AUTH_ONLY)

    secured = snep_send(sender, b"hello")

    assert secured.body == b"hello"
    assert snep_receive(receiver, secured, 0) == b"hello"


def test_round_trip_with_synchronized_counters() -> None:
    sender, receiver = _pair()

    for index, reading in enumerate([b"t=20", b"t=21", b""]):
        assert snep_receive(receiver, snep_send(sender, reading), index) == reading
    assert receiver.counter_recv == 3


def test_replay_of_accepted_payload_is_stale() -> None:
    rng = random.Random(12)
    for trial in range(1_000):
        sender, receiver = _pair(seed=trial)
        secured = snep_send(sender, rng.randbytes(rng.randrange(1, 32)))
        snep_receive(receiver, secured, 0)
        with pytest.raises(StaleCounter):
            snep_receive(receiver, secured, 0)


def test_single_bit_flips_are_never_accepted() -> None:
    rng = random.Random(13)
    sender, receiver = _pair()
    accepted = 0
    for _ in range(10_000):
        wire = snep_send(sender, rng.randbytes(rng.randrange(1, 40))).to_wire()
        tampered = _flip(wire, rng.randrange(len(wire) * 8))
        payload = SecuredPayload.from_wire(tampered, protection_mode=ProtectionMode.AUTH_ENC)
        try:
            snep_receive(receiver, payload, sender.counter_send - 1)
        except MacMismatch:
            continue
        accepted += 1

    assert accepted == 0


def test_oversized_plaintext_is_rejected() -> None:
    sender, _ = _pair()

    with pytest.raises(PayloadTooLarge):
        snep_send(sender, b"x" * 65)


def test_short_wire_payload_is_a_mac_mismatch() -> None:
    with pytest.raises(MacMismatch):
        SecuredPayload.from_wire(b"\x00" * 3, protection_mode=ProtectionMode.AUTH_ONLY)


def test_receive_window_skips_lost_packets() -> None:
    sender, receiver = _pair()
    for _ in range(5):
        snep_send(sender, b"lost")

    plaintext, counter = snep_receive_window(receiver, snep_send(sender, b"arrived"), window=16)

    assert plaintext == b"arrived"
    assert counter == 5
    assert receiver.counter_recv == 6


def test_receive_window_flags_replays_and_gives_up_beyond_window() -> None:
    sender, receiver = _pair()
    first = snep_send(sender, b"first")
    snep_receive_window(receiver, first)

    with pytest.raises(StaleCounter):
        snep_receive_window(receiver, first)

    for _ in range(20):
        snep_send(sender, b"lost")
    with pytest.raises(MacMismatch):
        snep_receive_window(receiver, snep_send(sender, b"too far"), window=4)


def test_receive_window_opens_late_arrivals_once() -> None:
    sender, receiver = _pair()
    late = snep_send(sender, b"late")
    snep_receive_window(receiver, snep_send(sender, b"early"))

    plaintext, counter = snep_receive_window(receiver, late)

    assert (plaintext, counter) == (b"late", 0)
    assert receiver.counter_recv == 2
    with pytest.raises(StaleCounter):
        snep_receive_window(receiver, late)


def test_counter_resync_moves_forward_only() -> None:
    _, receiver = _pair()
    receiver.counter_recv = 10

    counter_resync(receiver, 10, resync_proof(receiver.mac_key, 10))
    assert receiver.counter_recv == 10

    counter_resync(receiver, 15, resync_proof(receiver.mac_key, 15))
    assert receiver.counter_recv == 15

    counter_resync(receiver, 14, resync_proof(receiver.mac_key, 14))
    assert receiver.counter_recv == 15


def test_counter_resync_rejects_bad_proof() -> None:
    _, receiver = _pair()

    with pytest.raises(MacMismatch):
        counter_resync(receiver, 20, resync_proof(receiver.enc_key, 20))
    assert receiver.counter_recv == 0


def test_channel_rejects_shared_enc_and_mac_key() -> None:
    key = Key(b"\x01" * 16)

    with pytest.raises(ValueError, match="independent"):
        SnepChannel(peer_a=1, peer_b=2, enc_key=key, mac_key=key)


def test_all_zero_master_key_is_logged(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="wsnguard_core.snep.channel"):
        open_channel_pair(mote_a=1, mote_b=2, master_key=Key(bytes(KEY_SIZE)))

    assert "weak master key" in caplog.text
    assert "mote_a=1 mote_b=2" in caplog.text
