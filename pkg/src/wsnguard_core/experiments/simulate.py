from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from wsnguard_core.config import Scenario, scenario_echo
from wsnguard_core.netsim.engine import simulate_scenario
from wsnguard_core.netsim.metrics import (
    MetricsReport,
    write_detection_csv,
    write_metrics_csv,
    write_summary_json,
)

from .render import format_mj, render_table

logger = logging.getLogger(__name__)

METRICS_FILENAME = "metrics.csv"
SUMMARY_FILENAME = "summary.json"
DETECTION_FILENAME = "detection.csv"


@dataclass(slots=True, frozen=True)
class SimulationArtifacts:
    report: MetricsReport
    metrics_csv: Path
    summary_json: Path
    detection_csv: Path | None = None


def run_simulation(
    scenario: Scenario,
    *,
    out_dir: Path,
    seed: int | None = None,
) -> SimulationArtifacts:
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    report = simulate_scenario(scenario)

    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_csv = write_metrics_csv(report, out_dir / METRICS_FILENAME)
    summary_json = write_summary_json(
        report, out_dir / SUMMARY_FILENAME, scenario=scenario_echo(scenario)
    )
    detection_csv = None
    if scenario.detection.enabled:
        detection_csv = write_detection_csv(report, out_dir / DETECTION_FILENAME)
    logger.info("simulation artifacts written out_dir=%s seed=%d", out_dir, report.seed)
    return SimulationArtifacts(
        report=report,
        metrics_csv=metrics_csv,
        summary_json=summary_json,
        detection_csv=detection_csv,
    )


def render_flow_table(report: MetricsReport) -> str:
    headers = ("flow", "sent", "delivered", "dropped")
    rows = [
        (name, str(stats.sent), str(stats.delivered), str(stats.dropped))
        for name, stats in report.flows.items()
    ]
    return render_table(headers=headers, rows=rows)


def render_totals_table(report: MetricsReport) -> str:
    headers = ("metric", "value")
    rows = [(metric, str(value)) for metric, value in report.totals.items()]
    rows.append(("energy_spent_mj", format_mj(sum(report.energy_spent_uj.values()) / 1000)))
    if report.detection is not None:
        rows.append(("spoofing_detected", str(report.detection["spoofing_detected"]).lower()))
    return render_table(headers=headers, rows=rows)
