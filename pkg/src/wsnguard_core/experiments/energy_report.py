from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

from wsnguard_core.config import Scenario, TrafficEntry
from wsnguard_core.netsim.energy import CryptoOp, EnergyModel, crypto_cost_uj, uj_to_mj
from wsnguard_core.netsim.engine import simulate_scenario
from wsnguard_core.netsim.topology import TopologyConfig

from .render import format_mj, render_table

logger = logging.getLogger(__name__)

REFERENCE_CIPHER = "RIJANDEL"
LINE_MOTES = 10
LINE_READINGS = 5
LINE_READING_INTERVAL_MS = 100.0
LINE_INITIAL_ENERGY_MJ = 100_000.0
LINE_SEED = 11

# security-equivalent pairs compared in the report
EQUIVALENT_PAIRS = (("ECC160", "RSA1024"), ("ECC224", "RSA2048"))

ENERGY_JSON = "energy_report.json"
ENERGY_CSV = "energy_report.csv"


@dataclass(slots=True, frozen=True)
class AsymmetricRow:
    algorithm: str
    sign_mj: float
    verify_mj: float
    kx_client_mj: float
    kx_server_mj: float
    kx_total_mj: float


@dataclass(slots=True, frozen=True)
class CipherRow:
    cipher: str
    normalized: float
    relative_cost: float
    clocks: float | None


@dataclass(slots=True, frozen=True)
class PairComparison:
    cheaper: str
    costlier: str
    cheaper_kx_mj: float
    costlier_kx_mj: float

    @property
    def saving_factor(self) -> float:
        return round(self.costlier_kx_mj / self.cheaper_kx_mj, 3)


@dataclass(slots=True, frozen=True)
class PresetRun:
    algorithm: str
    motes: int
    key_exchange_mj: float
    data_mj: float

    @property
    def total_mj(self) -> float:
        return round(self.key_exchange_mj + self.data_mj, 3)


@dataclass(slots=True, frozen=True)
class EnergyReport:
    asymmetric: tuple[AsymmetricRow, ...]
    symmetric: tuple[CipherRow, ...]
    comparisons: tuple[PairComparison, ...]
    cheapest_key_exchange: str
    simulated: tuple[PresetRun, ...]

    def asymmetric_row(self, algorithm: str) -> AsymmetricRow:
        for row in self.asymmetric:
            if row.algorithm == algorithm.upper():
                return row
        raise KeyError(f"no asymmetric preset {algorithm}")

    def cipher_row(self, cipher: str) -> CipherRow:
        for row in self.symmetric:
            if row.cipher == cipher.upper():
                return row
        raise KeyError(f"no cipher preset {cipher}")


def asymmetric_rows(model: EnergyModel) -> list[AsymmetricRow]:
    rows: list[AsymmetricRow] = []
    for algorithm in sorted(model.asym_costs_mj):
        costs = model.asym_costs_mj[algorithm]
        rows.append(
            AsymmetricRow(
                algorithm=algorithm,
                sign_mj=costs.sign,
                verify_mj=costs.verify,
                kx_client_mj=costs.kx_client,
                kx_server_mj=costs.kx_server,
                kx_total_mj=round(costs.kx_total, 3),
            )
        )
    return rows


def cipher_rows(model: EnergyModel, *, reference: str = REFERENCE_CIPHER) -> list[CipherRow]:
    reference_cost = crypto_cost_uj(CryptoOp.SYM_BLOCK, model, cipher=reference)
    rows: list[CipherRow] = []
    for cipher in sorted(model.cipher_cost_multiplier):
        multiplier = model.cipher_cost_multiplier[cipher]
        rows.append(
            CipherRow(
                cipher=cipher,
                normalized=multiplier,
                relative_cost=round(model.cipher_cost_multiplier[reference] / multiplier, 3),
                clocks=model.cipher_clocks.get(cipher),
            )
        )
    logger.debug("reference cipher=%s block_cost_uj=%d", reference, reference_cost)
    return rows


def pair_comparisons(rows: list[AsymmetricRow]) -> list[PairComparison]:
    by_name = {row.algorithm: row for row in rows}
    comparisons: list[PairComparison] = []
    for left, right in EQUIVALENT_PAIRS:
        if left not in by_name or right not in by_name:
            continue
        ordered = sorted((by_name[left], by_name[right]), key=lambda row: row.kx_total_mj)
        comparisons.append(
            PairComparison(
                cheaper=ordered[0].algorithm,
                costlier=ordered[1].algorithm,
                cheaper_kx_mj=ordered[0].kx_total_mj,
                costlier_kx_mj=ordered[1].kx_total_mj,
            )
        )
    return comparisons


def line_scenario(model: EnergyModel, *, motes: int = LINE_MOTES) -> Scenario:
    """A line of motes, sink at one end, every other mote reporting readings to the sink."""
    traffic = [
        TrafficEntry(
            at_ms=float(mote_id),
            src=mote_id,
            repeat=LINE_READINGS,
            interval_ms=LINE_READING_INTERVAL_MS,
        )
        for mote_id in range(1, motes)
    ]
    return Scenario(
        name=f"line-{motes}",
        topology=TopologyConfig(
            layout="grid",
            rows=1,
            cols=motes,
            initial_energy_mj=LINE_INITIAL_ENERGY_MJ,
            sink_id=0,
        ),
        energy_model=model,
        traffic=traffic,
        duration_ms=LINE_READINGS * LINE_READING_INTERVAL_MS + motes,
        seed=LINE_SEED,
    )


def simulate_presets(model: EnergyModel, *, motes: int = LINE_MOTES) -> list[PresetRun]:
    report = simulate_scenario(line_scenario(model, motes=motes))
    data_mj = uj_to_mj(sum(report.energy_spent_uj.values()))
    runs: list[PresetRun] = []
    for algorithm in sorted(model.asym_costs_mj):
        # client side at each reporting mote, server side at the sink
        per_exchange = crypto_cost_uj(CryptoOp.KX_CLIENT, model, alg=algorithm) + crypto_cost_uj(
            CryptoOp.KX_SERVER, model, alg=algorithm
        )
        runs.append(
            PresetRun(
                algorithm=algorithm,
                motes=motes,
                key_exchange_mj=uj_to_mj(per_exchange * (motes - 1)),
                data_mj=data_mj,
            )
        )
    return runs


def build_energy_report(
    model: EnergyModel | None = None, *, motes: int = LINE_MOTES
) -> EnergyReport:
    model = model or EnergyModel()
    asymmetric = asymmetric_rows(model)
    cheapest = min(asymmetric, key=lambda row: row.kx_total_mj).algorithm
    return EnergyReport(
        asymmetric=tuple(asymmetric),
        symmetric=tuple(cipher_rows(model)),
        comparisons=tuple(pair_comparisons(asymmetric)),
        cheapest_key_exchange=cheapest,
        simulated=tuple(simulate_presets(model, motes=motes)),
    )


def render_asymmetric_table(report: EnergyReport) -> str:
    headers = ("algorithm", "sign_mj", "verify_mj", "kx_client_mj", "kx_server_mj", "kx_total_mj")
    rows = [
        (
            row.algorithm,
            format_mj(row.sign_mj),
            format_mj(row.verify_mj),
            format_mj(row.kx_client_mj),
            format_mj(row.kx_server_mj),
            format_mj(row.kx_total_mj),
        )
        for row in report.asymmetric
    ]
    return render_table(headers=headers, rows=rows)


def render_cipher_table(report: EnergyReport) -> str:
    headers = ("cipher", "normalized", "relative_cost", "clocks")
    rows = [
        (
            row.cipher,
            f"{row.normalized:.2f}",
            f"{row.relative_cost:.3f}",
            f"{row.clocks:.3f}" if row.clocks is not None else "-",
        )
        for row in report.symmetric
    ]
    return render_table(headers=headers, rows=rows)


def render_comparisons(report: EnergyReport) -> str:
    lines = [
        f"{item.cheaper} key exchange is cheaper than {item.costlier}: "
        f"{format_mj(item.cheaper_kx_mj)} mJ vs {format_mj(item.costlier_kx_mj)} mJ "
        f"({item.saving_factor:.3f}x)"
        for item in report.comparisons
    ]
    lines.append(f"cheapest key exchange: {report.cheapest_key_exchange}")
    return "\n".join(lines)


def render_simulated_table(report: EnergyReport) -> str:
    headers = ("algorithm", "motes", "key_exchange_mj", "data_mj", "total_mj")
    rows = [
        (
            run.algorithm,
            str(run.motes),
            format_mj(run.key_exchange_mj),
            format_mj(run.data_mj),
            format_mj(run.total_mj),
        )
        for run in report.simulated
    ]
    return render_table(headers=headers, rows=rows)


def energy_report_payload(report: EnergyReport) -> dict[str, object]:
    return {
        "asymmetric": [asdict(row) for row in report.asymmetric],
        "symmetric": [asdict(row) for row in report.symmetric],
        "comparisons": [
            {**asdict(item), "saving_factor": item.saving_factor} for item in report.comparisons
        ],
        "cheapest_key_exchange": report.cheapest_key_exchange,
        "simulated": [{**asdict(run), "total_mj": run.total_mj} for run in report.simulated],
    }


def write_energy_report(report: EnergyReport, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / ENERGY_JSON
    json_path.write_text(
        json.dumps(energy_report_payload(report), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    csv_path = out_dir / ENERGY_CSV
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("algorithm", "op", "mj"))
        for row in report.asymmetric:
            for op, value in (
                ("sign", row.sign_mj),
                ("verify", row.verify_mj),
                ("kx_client", row.kx_client_mj),
                ("kx_server", row.kx_server_mj),
                ("kx_total", row.kx_total_mj),
            ):
                writer.writerow((row.algorithm, op, format_mj(value)))
    return json_path, csv_path
