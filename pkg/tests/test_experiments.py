from __future__ import annotations

import json
from pathlib import Path

import pytest

from wsnguard_core.config import build_scenario
from wsnguard_core.experiments.attack_matrix import (
    ATTACKS,
    EXPECTED_MATRIX,
    VARIANTS,
    AttackMatrix,
    MatrixCell,
    attack_configs,
    build_attack_matrix,
    corrupted_routes,
    diff_against_expected,
    read_attack_matrix_csv,
    render_diff,
    render_matrix_table,
    write_attack_matrix,
)
from wsnguard_core.experiments.energy_report import (
    EnergyReport,
    build_energy_report,
    line_scenario,
    write_energy_report,
)
from wsnguard_core.experiments.render import format_mj, render_table, yes_no
from wsnguard_core.experiments.simulate import (
    render_flow_table,
    render_totals_table,
    run_simulation,
)
from wsnguard_core.netsim.energy import EnergyModel
from wsnguard_core.netsim.metrics import read_detection_csv, read_metrics_csv, read_summary_json
from wsnguard_core.netsim.topology import TopologyConfig, build_topology
from wsnguard_core.routing.table import RouteEntry
from wsnguard_core.schemas import RoutingVariant


@pytest.fixture(scope="module")
def matrix() -> AttackMatrix:
    return build_attack_matrix()


def test_attack_matrix_matches_expected_susceptibility(matrix: AttackMatrix) -> None:
    for attack in ATTACKS:
        for variant in VARIANTS:
            assert matrix.observed(attack, variant) == EXPECTED_MATRIX[attack][variant], (
                attack,
                variant.value,
            )
    assert diff_against_expected(matrix) == []
    assert render_diff([]) == "matrix matches expected susceptibility table"


def test_matrix_is_repeatable(matrix: AttackMatrix) -> None:
    assert build_attack_matrix().as_dict() == matrix.as_dict()


def test_disabled_attacks_corrupt_nothing() -> None:
    disabled = build_attack_matrix(attacks_enabled=False)

    assert not any(cell.corrupted for cell in disabled.cells)
    mismatches = diff_against_expected(disabled)
    assert len(mismatches) == 7
    assert "7 cell(s) differ" in render_diff(mismatches)


def _aodv_route(next_hop: int, hop_count: int, path: tuple[int, ...]) -> RouteEntry:
    return RouteEntry(
        destination=0,
        variant=RoutingVariant.AODV,
        next_hop=next_hop,
        hop_count=hop_count,
        physical_path=path,
    )


def test_routes_through_an_attacker_on_a_shortest_path_are_not_corrupted() -> None:
    # 0 1
    # 2 3
    square = build_topology(TopologyConfig(rows=2, cols=2, spacing_m=10.0, radio_range_m=10.0))
    baseline = {(3, 0): _aodv_route(2, 2, (3, 2, 0))}
    relayed = {(3, 0): _aodv_route(1, 2, (3, 1, 0))}
    spoofed = {(3, 0): _aodv_route(1, 1, (3, 1))}

    assert corrupted_routes(square, baseline, relayed, attackers=[1]) == []
    assert corrupted_routes(square, baseline, spoofed, attackers=[1]) == [(3, 0)]

    line = build_topology(TopologyConfig(rows=1, cols=3, spacing_m=10.0, radio_range_m=10.0))
    only_path = {(2, 0): _aodv_route(1, 1, (2, 1, 0))}
    assert corrupted_routes(line, {}, only_path, attackers=[1]) == []


def test_matrix_files(matrix: AttackMatrix, tmp_path: Path) -> None:
    json_path, csv_path = write_attack_matrix(matrix, tmp_path)

    payload = json.loads(json_path.read_text(encoding="utf-8"))
    assert payload["attacks_enabled"] is True
    assert payload["mismatches"] == []
    assert payload["matrix"]["tunneling"] == {"dsr": True, "aodv": True}
    assert read_attack_matrix_csv(csv_path) == matrix.as_dict()
    assert csv_path.read_text(encoding="utf-8").splitlines()[0] == "attack,dsr,aodv"


def test_matrix_csv_header_is_checked(tmp_path: Path) -> None:
    path = tmp_path / "matrix.csv"
    path.write_text("attack,aodv,dsr\n", encoding="utf-8")

    with pytest.raises(ValueError, match="columns"):
        read_attack_matrix_csv(path)


def test_matrix_table_lists_every_attack() -> None:
    cells = tuple(
        MatrixCell(attack=attack, variant=variant, corrupted=False, corrupted_routes=0)
        for attack in ATTACKS
        for variant in VARIANTS
    )
    table = render_matrix_table(AttackMatrix(cells=cells, attacks_enabled=False))

    lines = table.splitlines()
    assert lines[0].split(" | ")[0].strip() == "attack"
    assert len(lines) == 2 + len(ATTACKS)


def test_unknown_attack_is_rejected() -> None:
    with pytest.raises(ValueError, match="unknown attack"):
        attack_configs("jamming")


def test_tunneling_uses_a_mutual_pair() -> None:
    first, second = attack_configs("tunneling")

    assert first.peer == second.mote_id
    assert second.peer == first.mote_id


@pytest.fixture(scope="module")
def energy_report() -> EnergyReport:
    return build_energy_report(motes=4)


def test_asymmetric_costs(energy_report: EnergyReport) -> None:
    assert energy_report.asymmetric_row("RSA1024").kx_total_mj == pytest.approx(319.4)
    assert energy_report.asymmetric_row("ECC160").kx_total_mj == pytest.approx(44.6)
    assert energy_report.asymmetric_row("RSA2048").sign_mj == pytest.approx(2302.7)
    assert energy_report.cheapest_key_exchange == "ECC160"


def test_ecc_beats_its_rsa_equivalent(energy_report: EnergyReport) -> None:
    comparison = energy_report.comparisons[0]

    assert (comparison.cheaper, comparison.costlier) == ("ECC160", "RSA1024")
    assert comparison.saving_factor == pytest.approx(319.4 / 44.6, rel=1e-3)


def test_cipher_relative_costs(energy_report: EnergyReport) -> None:
    assert energy_report.cipher_row("RIJANDEL").relative_cost == pytest.approx(1.0)
    assert energy_report.cipher_row("RC6").relative_cost == pytest.approx(3.448)
    with pytest.raises(KeyError):
        energy_report.cipher_row("DES")


def test_simulated_presets_share_the_data_energy(energy_report: EnergyReport) -> None:
    runs = {run.algorithm: run for run in energy_report.simulated}

    assert runs["ECC160"].data_mj == runs["RSA1024"].data_mj > 0
    assert runs["ECC160"].key_exchange_mj == pytest.approx(3 * 44.6)
    assert runs["ECC160"].total_mj < runs["RSA1024"].total_mj


def test_energy_report_files(energy_report: EnergyReport, tmp_path: Path) -> None:
    json_path, csv_path = write_energy_report(energy_report, tmp_path)

    payload = json.loads(json_path.read_text(encoding="utf-8"))
    assert payload["cheapest_key_exchange"] == "ECC160"
    rows = csv_path.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "algorithm,op,mj"
    assert "RSA1024,kx_total,319.400" in rows


def test_line_scenario_reports_to_the_sink() -> None:
    scenario = line_scenario(EnergyModel(), motes=4)

    assert [entry.src for entry in scenario.traffic] == [1, 2, 3]
    assert scenario.topology.sink_id == 0


def test_run_simulation_writes_every_artifact(tmp_path: Path) -> None:
    scenario = build_scenario(
        {
            "topology": {"rows": 1, "cols": 3},
            "traffic": [{"src": 2, "repeat": 2, "interval_ms": 100}],
            "detection": {"enabled": True},
        }
    )

    artifacts = run_simulation(scenario, out_dir=tmp_path, seed=9)

    assert artifacts.report.seed == 9
    rows = read_metrics_csv(artifacts.metrics_csv)
    delivered = [row.value for row in rows if row.metric == "packets_delivered"]
    assert sum(delivered) == 2
    summary = read_summary_json(artifacts.summary_json)
    assert summary["seed"] == 9
    assert summary["scenario"]["seed"] == 9
    assert summary["flows"]["2->0"] == {"sent": 2, "delivered": 2, "dropped": 0}
    assert artifacts.detection_csv is not None
    assert read_detection_csv(artifacts.detection_csv)
    assert "2->0" in render_flow_table(artifacts.report)
    assert "spoofing_detected" in render_totals_table(artifacts.report)


def test_render_helpers() -> None:
    table = render_table(headers=("a", "bb"), rows=[("1", "2")])

    assert table.splitlines() == ["a | bb", "--+---", "1 | 2 "]
    assert render_table(headers=("a",), rows=[]) == "no rows"
    assert yes_no(True) == "yes"
    assert format_mj(1.23456) == "1.235"


def test_matrix_variants_are_dsr_then_aodv() -> None:
    assert VARIANTS == (RoutingVariant.DSR, RoutingVariant.AODV)
