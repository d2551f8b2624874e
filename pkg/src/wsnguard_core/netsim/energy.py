"""Energy presets and the integer microjoule ledger.

Radio cost follows the per-bit instruction count of the mote's processor. Symmetric cipher
cost scales a base instruction count by each cipher's normalized speed. Asymmetric operations
are charged a fixed millijoule cost per operation.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import StrEnum

from pydantic import Field, field_validator, model_validator

from wsnguard_core.schemas import DTOBase

from .topology import Mote

logger = logging.getLogger(__name__)

DEFAULT_INSTRUCTIONS_PER_BIT = 900
DEFAULT_ENERGY_PER_INSTRUCTION_MJ = 0.000005
DEFAULT_RX_FACTOR = 0.5
DEFAULT_BASE_CIPHER_INSTR = 10_000
DEFAULT_IDLE_MJ_PER_S = 0.01
DEFAULT_HELLO_PROCESSING_INSTR = 1_000

DEFAULT_CIPHER_MULTIPLIERS: dict[str, float] = {
    "MARS": 0.28,
    "RC6": 0.29,
    "RIJANDEL": 1.00,
    "SERPENT": 0.08,
    "TWOFISH": 0.36,
}

# informational only; units are not stated alongside the values
DEFAULT_CIPHER_CLOCKS: dict[str, float] = {
    "MARS": 34.163,
    "RC6": 32.731,
    "RIJANDEL": 9.464,
    "SERPENT": 126.074,
    "TWOFISH": 26.500,
}


class AsymCost(DTOBase):
    sign: float = Field(gt=0.0)
    verify: float = Field(gt=0.0)
    kx_client: float = Field(gt=0.0)
    kx_server: float = Field(gt=0.0)

    @property
    def kx_total(self) -> float:
        return self.kx_client + self.kx_server


DEFAULT_ASYM_COSTS_MJ: dict[str, dict[str, float]] = {
    "RSA1024": {"sign": 304.0, "verify": 11.9, "kx_client": 15.4, "kx_server": 304.0},
    "ECC160": {"sign": 22.82, "verify": 45.09, "kx_client": 22.3, "kx_server": 22.3},
    "RSA2048": {"sign": 2302.7, "verify": 53.7, "kx_client": 57.2, "kx_server": 2302.7},
    "ECC224": {"sign": 61.54, "verify": 121.98, "kx_client": 60.4, "kx_server": 60.4},
}


class EnergyModel(DTOBase):
    instructions_per_bit: int = Field(default=DEFAULT_INSTRUCTIONS_PER_BIT, ge=800, le=1000)
    energy_per_instruction_mj: float = Field(default=DEFAULT_ENERGY_PER_INSTRUCTION_MJ, gt=0.0)
    rx_factor: float = Field(default=DEFAULT_RX_FACTOR, gt=0.0)
    base_cipher_instr: int = Field(default=DEFAULT_BASE_CIPHER_INSTR, gt=0)
    cipher: str = "RIJANDEL"
    cipher_cost_multiplier: dict[str, float] = Field(
        default_factory=lambda: dict(DEFAULT_CIPHER_MULTIPLIERS)
    )
    cipher_clocks: dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_CIPHER_CLOCKS))
    asym_costs_mj: dict[str, AsymCost] = Field(
        default_factory=lambda: {
            name: AsymCost(**costs) for name, costs in DEFAULT_ASYM_COSTS_MJ.items()
        }
    )
    idle_mj_per_s: float = Field(default=DEFAULT_IDLE_MJ_PER_S, ge=0.0)
    hello_processing_instr: int = Field(default=DEFAULT_HELLO_PROCESSING_INSTR, ge=0)

    @field_validator("cipher")
    @classmethod
    def normalize_cipher(cls, value: str) -> str:
        normalized = value.strip().upper()
        if not normalized:
            raise ValueError("energy_model.cipher must not be empty")
        return normalized

    @model_validator(mode="after")
    def validate_costs(self) -> EnergyModel:
        for name, multiplier in self.cipher_cost_multiplier.items():
            if multiplier <= 0.0:
                raise ValueError(f"cipher_cost_multiplier[{name}] must be > 0")
        if self.cipher not in self.cipher_cost_multiplier:
            raise ValueError(f"energy_model.cipher {self.cipher} has no cost multiplier")
        return self


class Direction(StrEnum):
    TX = "tx"
    RX = "rx"


class CryptoOp(StrEnum):
    SYM_BLOCK = "sym_block"
    MAC = "mac"
    ASYM_SIGN = "asym_sign"
    ASYM_VERIFY = "asym_verify"
    KX_CLIENT = "kx_client"
    KX_SERVER = "kx_server"


class EnergyCategory(StrEnum):
    RADIO_TX = "radio_tx"
    RADIO_RX = "radio_rx"
    CRYPTO = "crypto"
    PROCESSING = "processing"
    IDLE = "idle"


class UnknownAlgorithm(ValueError):
    pass


_ASYM_FIELDS = {
    CryptoOp.ASYM_SIGN: "sign",
    CryptoOp.ASYM_VERIFY: "verify",
    CryptoOp.KX_CLIENT: "kx_client",
    CryptoOp.KX_SERVER: "kx_server",
}


@dataclass(slots=True, frozen=True)
class ChargeResult:
    charged_uj: int
    remaining_uj: int
    died: bool


@dataclass(slots=True)
class EnergyLedger:
    _charges: defaultdict[tuple[int, str], int] = field(
        default_factory=lambda: defaultdict(int)
    )

    def record(self, mote_id: int, category: EnergyCategory, amount_uj: int) -> None:
        if amount_uj:
            self._charges[(mote_id, category.value)] += amount_uj

    def spent_uj(self, mote_id: int) -> int:
        return sum(value for (owner, _), value in self._charges.items() if owner == mote_id)

    def total_uj(self) -> int:
        return sum(self._charges.values())

    def by_category(self, mote_id: int) -> dict[str, int]:
        return {
            category: value
            for (owner, category), value in sorted(self._charges.items())
            if owner == mote_id
        }


def build_energy_model(overrides: dict[str, object] | None = None) -> EnergyModel:
    return EnergyModel.model_validate(dict(overrides or {}))


def mj_to_uj(value_mj: float) -> int:
    return int(round(value_mj * 1000))


def uj_to_mj(value_uj: int) -> float:
    return round(value_uj / 1000, 3)


def radio_cost_uj(bits: int, direction: Direction, model: EnergyModel) -> int:
    if bits < 0:
        raise ValueError("bits must be >= 0")
    tx_mj = bits * model.instructions_per_bit * model.energy_per_instruction_mj
    if direction == Direction.RX:
        return mj_to_uj(tx_mj * model.rx_factor)
    return mj_to_uj(tx_mj)


def crypto_cost_uj(
    op: CryptoOp,
    model: EnergyModel,
    *,
    alg: str | None = None,
    cipher: str | None = None,
) -> int:
    if op in (CryptoOp.SYM_BLOCK, CryptoOp.MAC):
        name = (cipher or model.cipher).upper()
        multiplier = model.cipher_cost_multiplier.get(name)
        if multiplier is None:
            raise UnknownAlgorithm(f"unknown cipher: {name}")
        instructions = model.base_cipher_instr / multiplier
        return mj_to_uj(instructions * model.energy_per_instruction_mj)

    if alg is None:
        raise UnknownAlgorithm(f"{op.value} requires an algorithm")
    costs = model.asym_costs_mj.get(alg.upper())
    if costs is None:
        raise UnknownAlgorithm(f"unknown asymmetric algorithm: {alg}")
    return mj_to_uj(getattr(costs, _ASYM_FIELDS[op]))


def charge_radio(
    mote: Mote,
    bits: int,
    direction: Direction,
    *,
    model: EnergyModel,
    ledger: EnergyLedger | None = None,
) -> ChargeResult:
    cost = radio_cost_uj(bits, direction, model)
    category = EnergyCategory.RADIO_TX if direction == Direction.TX else EnergyCategory.RADIO_RX
    return _charge(mote, cost, category=category, ledger=ledger)


def charge_crypto(
    mote: Mote,
    op: CryptoOp,
    *,
    model: EnergyModel,
    alg: str | None = None,
    ledger: EnergyLedger | None = None,
) -> ChargeResult:
    cost = crypto_cost_uj(op, model, alg=alg)
    return _charge(mote, cost, category=EnergyCategory.CRYPTO, ledger=ledger)


def charge_processing(
    mote: Mote,
    instructions: int,
    *,
    model: EnergyModel,
    ledger: EnergyLedger | None = None,
) -> ChargeResult:
    cost = mj_to_uj(instructions * model.energy_per_instruction_mj)
    return _charge(mote, cost, category=EnergyCategory.PROCESSING, ledger=ledger)


def charge_idle(
    mote: Mote,
    duration_ms: float,
    *,
    model: EnergyModel,
    ledger: EnergyLedger | None = None,
) -> ChargeResult:
    cost = mj_to_uj(model.idle_mj_per_s * duration_ms / 1000)
    return _charge(mote, cost, category=EnergyCategory.IDLE, ledger=ledger)


def _charge(
    mote: Mote,
    cost_uj: int,
    *,
    category: EnergyCategory,
    ledger: EnergyLedger | None,
) -> ChargeResult:
    if not mote.alive:
        return ChargeResult(charged_uj=0, remaining_uj=mote.energy_uj, died=False)

    charged = min(cost_uj, mote.energy_uj)
    mote.energy_uj -= charged
    if ledger is not None:
        ledger.record(mote.id, category, charged)

    died = mote.energy_uj == 0 and charged > 0
    if died:
        logger.info("mote depleted id=%d category=%s", mote.id, category.value)
    return ChargeResult(charged_uj=charged, remaining_uj=mote.energy_uj, died=died)
