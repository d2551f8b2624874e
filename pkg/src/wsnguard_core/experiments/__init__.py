"""Experiment drivers behind the CLI: single runs, the attack matrix and the energy report."""

from .attack_matrix import (
    ATTACKS,
    EXPECTED_MATRIX,
    VARIANTS,
    AttackMatrix,
    MatrixCell,
    MatrixMismatch,
    build_attack_matrix,
    canonical_network,
    diff_against_expected,
    discover_all,
    read_attack_matrix_csv,
    render_diff,
    render_matrix_table,
    write_attack_matrix,
)
from .effects import energy_increase, honest_hop_distance, shortest_path_share, traffic_share
from .energy_report import (
    EnergyReport,
    build_energy_report,
    render_asymmetric_table,
    render_cipher_table,
    render_comparisons,
    render_simulated_table,
    write_energy_report,
)
from .render import render_table
from .simulate import SimulationArtifacts, render_flow_table, render_totals_table, run_simulation

__all__ = [
    "ATTACKS",
    "AttackMatrix",
    "EXPECTED_MATRIX",
    "EnergyReport",
    "MatrixCell",
    "MatrixMismatch",
    "SimulationArtifacts",
    "VARIANTS",
    "build_attack_matrix",
    "build_energy_report",
    "canonical_network",
    "diff_against_expected",
    "discover_all",
    "energy_increase",
    "honest_hop_distance",
    "read_attack_matrix_csv",
    "render_asymmetric_table",
    "render_cipher_table",
    "render_comparisons",
    "render_diff",
    "render_flow_table",
    "render_matrix_table",
    "render_simulated_table",
    "render_table",
    "render_totals_table",
    "run_simulation",
    "shortest_path_share",
    "traffic_share",
    "write_attack_matrix",
    "write_energy_report",
]
