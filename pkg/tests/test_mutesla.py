from __future__ import annotations

import logging
import random

import pytest

from wsnguard_core.crypto.primitives import KEY_SIZE, Key, Tag, hash_forward, mac
from wsnguard_core.mutesla.chain import (
    BroadcastPacket,
    ChainExpired,
    KeyChain,
    broadcast_mac_input,
    decode_broadcast,
    decode_disclosure,
    encode_broadcast,
    encode_disclosure,
    generate_chain,
    mt_broadcast,
    mt_disclose,
)
from wsnguard_core.mutesla.receiver import (
    BadChainKey,
    DiscardReason,
    ReceiverState,
    ReceiveStatus,
    mt_on_disclosure,
    mt_receive,
    purge_unverifiable,
)

SEED = Key(bytes(range(16)))


def _chain(n: int = 20, *, interval_len: float = 100.0, d: int = 2) -> KeyChain:
    return generate_chain(SEED, n, interval_len=interval_len, d=d, start_time=0.0)


def test_chain_links_back_to_commitment() -> None:
    chain = _chain(10)

    assert len(chain.keys) == 11
    for index in range(1, 11):
        assert hash_forward(chain.key_at(index)) == chain.key_at(index - 1)
    assert chain.commitment == chain.keys[0]


def test_chain_rejects_non_positive_length() -> None:
    with pytest.raises(ValueError, match="length_n"):
        generate_chain(SEED, 0)


def test_broadcast_tags_with_current_interval_key() -> None:
    chain = _chain()

    packet = mt_broadcast(chain, b"new-task", 250.0)

    assert packet.interval_index == 3
    assert packet.tag == mac(chain.key_at(3), broadcast_mac_input(3, b"new-task"))


def test_broadcast_outside_chain_window_expires() -> None:
    chain = _chain(5)

    with pytest.raises(ChainExpired):
        mt_broadcast(chain, b"late", 500.0)
    with pytest.raises(ChainExpired):
        mt_broadcast(chain, b"early", -1.0)


def test_disclosure_follows_delay_and_never_repeats() -> None:
    chain = _chain()

    assert mt_disclose(chain, 50.0) is None
    assert mt_disclose(chain, 150.0) is None
    disclosed = mt_disclose(chain, 250.0)
    assert disclosed is not None
    assert disclosed.interval_index == 1
    assert disclosed.key == chain.key_at(1)
    assert mt_disclose(chain, 260.0) is None
    assert chain.params.disclosure_time(1) == pytest.approx(200.0)


def test_receiver_buffers_then_authenticates() -> None:
    chain = _chain()
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=10.0)
    packet = mt_broadcast(chain, b"reading-request", 10.0)

    outcome = mt_receive(state, packet, chain.params, arrival_time=15.0)
    assert outcome.buffered

    messages = mt_on_disclosure(state, chain.key_at(1), 1)

    assert messages == [b"reading-request"]
    assert state.buffer == []
    assert state.last_verified_index == 1


def test_receiver_discards_when_key_may_be_public() -> None:
    chain = _chain()
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=20.0)
    packet = mt_broadcast(chain, b"stale", 10.0)

    # disclosure of interval 1 happens at 200 ms; 185 + 20 crosses it
    outcome = mt_receive(state, packet, chain.params, arrival_time=185.0)

    assert outcome.status == ReceiveStatus.DISCARDED
    assert outcome.reason == DiscardReason.KEY_ALREADY_DISCLOSED
    assert state.buffer == []


def test_receiver_discards_invalid_and_verified_intervals() -> None:
    chain = _chain(5)
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=0.0)
    forged = BroadcastPacket(message=b"x", interval_index=9, tag=Tag(b"\x00" * 8))

    assert mt_receive(state, forged, chain.params, 0.0).reason == DiscardReason.INVALID_INTERVAL

    mt_on_disclosure(state, chain.key_at(2), 2)
    old = BroadcastPacket(message=b"x", interval_index=2, tag=Tag(b"\x00" * 8))
    outcome = mt_receive(state, old, chain.params, 0.0)
    assert outcome.reason == DiscardReason.KEY_ALREADY_DISCLOSED


def test_random_keys_fail_the_chain_check() -> None:
    chain = _chain()
    rng = random.Random(21)
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=10.0)
    mt_receive(state, mt_broadcast(chain, b"keep", 10.0), chain.params, 11.0)

    for _ in range(1_000):
        with pytest.raises(BadChainKey):
            mt_on_disclosure(state, Key.random(rng), 1)

    assert len(state.buffer) == 1
    assert state.last_verified_index == 0


def test_disclosure_must_be_newer_than_verified() -> None:
    chain = _chain()
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=10.0)
    mt_on_disclosure(state, chain.key_at(2), 2)

    with pytest.raises(BadChainKey):
        mt_on_disclosure(state, chain.key_at(2), 2)


def test_lost_disclosure_is_bridged_by_the_next_key() -> None:
    chain = _chain()
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=10.0)
    mt_receive(state, mt_broadcast(chain, b"one", 10.0), chain.params, 11.0)
    mt_on_disclosure(state, chain.key_at(1), 1)
    mt_receive(state, mt_broadcast(chain, b"two", 110.0), chain.params, 111.0)
    mt_receive(state, mt_broadcast(chain, b"three", 210.0), chain.params, 211.0)

    messages = mt_on_disclosure(state, chain.key_at(3), 3)

    assert messages == [b"three"]
    assert [entry.packet.message for entry in state.buffer] == [b"two"]
    assert purge_unverifiable(state) == 1
    assert state.buffer == []


def test_forged_tags_are_dropped_on_disclosure() -> None:
    chain = _chain()
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=10.0)
    forged = BroadcastPacket(message=b"evil", interval_index=1, tag=Tag(b"\xaa" * 8))
    mt_receive(state, forged, chain.params, 5.0)

    assert mt_on_disclosure(state, chain.key_at(1), 1) == []
    assert state.rejected_count == 1


def test_forgery_campaign_never_authenticates() -> None:
    rng = random.Random(22)
    interval = 100.0
    chain = _chain(50, interval_len=interval)
    state = ReceiverState(commitment_key=chain.commitment, max_clock_error_eps=10.0)
    honest: set[bytes] = set()
    authenticated: list[bytes] = []
    known_keys: dict[int, Key] = {}
    forged_sent = 0

    for index in range(1, 43):
        base = (index - 1) * interval
        disclosed = mt_disclose(chain, base)
        if disclosed is not None:
            known_keys[disclosed.interval_index] = disclosed.key
            authenticated.extend(
                mt_on_disclosure(state, disclosed.key, disclosed.interval_index)
            )
        if index > 40:
            continue

        message = f"cmd-{index}".encode()
        honest.add(message)
        mt_receive(state, mt_broadcast(chain, message, base + 5.0), chain.params, base + 6.0)

        for attempt in range(250):
            forged_message = f"forged-{index}-{attempt}".encode()
            if known_keys and attempt % 2 == 0:
                # correct tag under an already public key
                key_index = max(known_keys)
                target = key_index if attempt % 4 == 0 else index
                tag = mac(known_keys[key_index], broadcast_mac_input(target, forged_message))
            else:
                target = index + rng.randrange(0, 2)
                tag = Tag(rng.randbytes(8))
            packet = BroadcastPacket(message=forged_message, interval_index=target, tag=tag)
            mt_receive(state, packet, chain.params, base + 7.0)
            forged_sent += 1

    assert forged_sent >= 10_000
    assert not [message for message in authenticated if message not in honest]
    assert set(authenticated) == honest


def test_wire_codecs_keep_layout() -> None:
    chain = _chain()
    packet = mt_broadcast(chain, b"abc", 10.0)
    wire = encode_broadcast(packet)

    assert len(wire) == 4 + 3 + 8
    assert decode_broadcast(wire) == packet

    disclosed = mt_disclose(chain, 300.0)
    assert disclosed is not None
    assert len(encode_disclosure(disclosed)) == 20
    assert decode_disclosure(encode_disclosure(disclosed)) == disclosed
    with pytest.raises(ValueError):
        decode_disclosure(b"\x00" * 19)
    with pytest.raises(ValueError):
        decode_broadcast(b"\x00" * 5)


def test_all_zero_chain_seed_is_logged(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="wsnguard_core.mutesla.chain"):
        generate_chain(Key(bytes(KEY_SIZE)), 4)

    assert "weak key chain seed n=4" in caplog.text
