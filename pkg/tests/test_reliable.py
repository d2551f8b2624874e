from __future__ import annotations

import pytest

from wsnguard_core.netsim.energy import Direction, EnergyLedger, EnergyModel, radio_cost_uj
from wsnguard_core.netsim.packets import HEADER_BYTES, WirePacket
from wsnguard_core.netsim.reliable import (
    HopStatus,
    LossRule,
    LossScript,
    ReliabilityPolicy,
    send_reliable,
    transmit_hop,
)
from wsnguard_core.netsim.topology import Mote, TopologyConfig, build_topology
from wsnguard_core.schemas import BROADCAST_ID, PacketKind, Reliability


def _packet(reliability: Reliability = Reliability.RELIABLE) -> WirePacket:
    return WirePacket(
        src=0, dst=1, kind=PacketKind.DATA, reliability=reliability, payload=b"reading"
    )


def _pair() -> tuple[Mote, Mote]:
    network = build_topology(TopologyConfig(rows=1, cols=2))
    return network.mote(0), network.mote(1)


def test_loss_free_link_delivers_first_time() -> None:
    sender, receiver = _pair()

    outcome = send_reliable(sender, _packet(), receiver=receiver, model=EnergyModel())

    assert outcome.status == HopStatus.DELIVERED
    assert outcome.transmissions == 1


def test_scripted_losses_cost_one_charge_per_attempt() -> None:
    sender, receiver = _pair()
    ledger = EnergyLedger()
    losses = LossScript.from_rules([LossRule(link=(0, 1), drop_first=2)])
    packet = _packet()
    model = EnergyModel()

    outcome = send_reliable(
        sender, packet, receiver=receiver, model=model, ledger=ledger, losses=losses
    )

    assert outcome.delivered
    assert outcome.transmissions == 3
    tx_cost = radio_cost_uj(packet.on_air_bits, Direction.TX, model)
    assert ledger.by_category(0)["radio_tx"] == 3 * tx_cost
    rx_cost = radio_cost_uj(packet.on_air_bits, Direction.RX, model)
    assert ledger.by_category(1)["radio_rx"] == rx_cost


def test_dead_link_fails_after_all_retries() -> None:
    sender, receiver = _pair()
    losses = LossScript.from_rules([LossRule(link=(1, 0), drop_all=True)])

    outcome = send_reliable(
        sender,
        _packet(),
        receiver=receiver,
        model=EnergyModel(),
        losses=losses,
        policy=ReliabilityPolicy(max_retries=3, ack_timeout_ms=50.0),
    )

    assert outcome.status == HopStatus.FAILED
    assert outcome.transmissions == 4
    assert outcome.elapsed_ms == pytest.approx(200.0)


def test_unreliable_packet_is_sent_once() -> None:
    sender, receiver = _pair()
    losses = LossScript.from_rules([LossRule(link=(0, 1), drop_first=1)])

    outcome = transmit_hop(
        sender,
        _packet(Reliability.UNRELIABLE),
        receiver=receiver,
        model=EnergyModel(),
        losses=losses,
    )

    assert not outcome.delivered
    assert outcome.transmissions == 1


def test_send_reliable_rejects_unreliable_packets() -> None:
    sender, receiver = _pair()

    with pytest.raises(ValueError, match="reliable"):
        send_reliable(
            sender, _packet(Reliability.UNRELIABLE), receiver=receiver, model=EnergyModel()
        )


def test_dead_receiver_never_acknowledges() -> None:
    sender, receiver = _pair()
    receiver.energy_uj = 0

    outcome = send_reliable(
        sender,
        _packet(),
        receiver=receiver,
        model=EnergyModel(),
        policy=ReliabilityPolicy(max_retries=1),
    )

    assert outcome.transmissions == 2
    assert not outcome.delivered


def test_loss_rule_needs_two_motes() -> None:
    with pytest.raises(ValueError):
        LossRule(link=(3, 3))


def test_wire_header_layout() -> None:
    packet = WirePacket(
        src=0x0102,
        dst=BROADCAST_ID,
        kind=PacketKind.HELLO,
        reliability=Reliability.UNRELIABLE,
        payload=b"\x09",
        hop_ttl=1,
    )

    wire = packet.encode()

    assert wire[:HEADER_BYTES] == bytes([0x01, 0x02, 0xFF, 0xFF, 6, 0, 1, 1])
    assert WirePacket.decode(wire) == packet
    assert packet.is_broadcast
    assert packet.hop() is None


def test_wire_packet_limits() -> None:
    with pytest.raises(ValueError, match="exceeds"):
        _packet().with_payload(b"x" * 65)
    with pytest.raises(ValueError, match="length field"):
        WirePacket.decode(_packet().encode() + b"extra")
    assert _packet().hop().hop_ttl == 31
