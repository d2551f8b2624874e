from __future__ import annotations

import pytest
from pydantic import ValidationError

from wsnguard_core.netsim.energy import (
    CryptoOp,
    Direction,
    EnergyCategory,
    EnergyLedger,
    EnergyModel,
    UnknownAlgorithm,
    build_energy_model,
    charge_crypto,
    charge_idle,
    charge_radio,
    crypto_cost_uj,
    radio_cost_uj,
    uj_to_mj,
)
from wsnguard_core.netsim.packets import WirePacket
from wsnguard_core.netsim.topology import Mote
from wsnguard_core.schemas import PacketKind, Reliability


def _mote(energy_mj: float = 1_000.0) -> Mote:
    energy_uj = int(energy_mj * 1000)
    return Mote(
        id=1,
        position=(0.0, 0.0),
        radio_range=10.0,
        energy_uj=energy_uj,
        initial_energy_uj=energy_uj,
    )


def test_radio_charge_for_header_plus_twenty_bytes() -> None:
    packet = WirePacket(
        src=1, dst=2, kind=PacketKind.DATA, reliability=Reliability.RELIABLE, payload=b"x" * 20
    )
    mote = _mote()
    ledger = EnergyLedger()

    result = charge_radio(
        mote, packet.on_air_bits, Direction.TX, model=EnergyModel(), ledger=ledger
    )

    assert packet.on_air_bits == 224
    assert result.charged_uj == 1_008
    assert uj_to_mj(result.charged_uj) == pytest.approx(1.008)
    assert ledger.by_category(1) == {EnergyCategory.RADIO_TX.value: 1_008}


def test_receive_costs_a_fraction_of_transmit() -> None:
    model = EnergyModel()

    assert radio_cost_uj(0, Direction.TX, model) == 0
    assert radio_cost_uj(224, Direction.RX, model) == 504


def test_charge_floors_at_zero_and_kills_the_mote() -> None:
    mote = _mote(0.5)

    result = charge_radio(mote, 224, Direction.TX, model=EnergyModel())

    assert result.charged_uj == 500
    assert result.died
    assert mote.energy_uj == 0
    assert not mote.alive

    after = charge_radio(mote, 224, Direction.TX, model=EnergyModel())
    assert after.charged_uj == 0
    assert not after.died


def test_asymmetric_costs_follow_the_presets() -> None:
    model = EnergyModel()
    mote = _mote(10_000.0)

    signed = charge_crypto(mote, CryptoOp.ASYM_SIGN, model=model, alg="RSA1024")
    assert signed.charged_uj == 304_000
    kx = crypto_cost_uj(CryptoOp.KX_CLIENT, model, alg="ecc160") + crypto_cost_uj(
        CryptoOp.KX_SERVER, model, alg="ECC160"
    )
    assert uj_to_mj(kx) == pytest.approx(44.6)
    assert uj_to_mj(crypto_cost_uj(CryptoOp.ASYM_SIGN, model, alg="RSA2048")) == pytest.approx(
        2302.7
    )


def test_symmetric_cost_scales_with_normalized_speed() -> None:
    model = EnergyModel()

    rijndael = crypto_cost_uj(CryptoOp.SYM_BLOCK, model, cipher="RIJANDEL")
    serpent = crypto_cost_uj(CryptoOp.SYM_BLOCK, model, cipher="SERPENT")

    assert serpent / rijndael == pytest.approx(12.5)
    assert crypto_cost_uj(CryptoOp.MAC, model) == rijndael


def test_unknown_algorithms_are_rejected() -> None:
    model = EnergyModel()

    with pytest.raises(UnknownAlgorithm):
        crypto_cost_uj(CryptoOp.ASYM_SIGN, model, alg="DSA512")
    with pytest.raises(UnknownAlgorithm):
        crypto_cost_uj(CryptoOp.KX_CLIENT, model)
    with pytest.raises(UnknownAlgorithm):
        crypto_cost_uj(CryptoOp.SYM_BLOCK, model, cipher="DES")


def test_model_validation() -> None:
    assert build_energy_model({"cipher": " rc6 "}).cipher == "RC6"
    with pytest.raises(ValidationError):
        build_energy_model({"instructions_per_bit": 700})
    with pytest.raises(ValidationError):
        build_energy_model({"cipher": "BLOWFISH"})
    with pytest.raises(ValidationError):
        build_energy_model({"cipher_cost_multiplier": {"RIJANDEL": 0.0}})


def test_idle_drain_and_ledger_totals() -> None:
    mote = _mote()
    ledger = EnergyLedger()
    model = EnergyModel()

    charge_idle(mote, 1_000.0, model=model, ledger=ledger)
    charge_radio(mote, 8, Direction.RX, model=model, ledger=ledger)

    assert ledger.by_category(1)[EnergyCategory.IDLE.value] == 10
    assert ledger.spent_uj(1) == mote.initial_energy_uj - mote.energy_uj
    assert ledger.total_uj() == ledger.spent_uj(1)
