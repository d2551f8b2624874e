from __future__ import annotations

from pathlib import Path

import pytest

from wsnguard_core.config import build_scenario
from wsnguard_core.netsim.engine import simulate_scenario
from wsnguard_core.netsim.metrics import (
    DETECTION_COLUMNS,
    METRICS_COLUMNS,
    MetricRow,
    MetricsCollector,
    attacker_scope,
    mote_scope,
    read_detection_csv,
    read_metrics_csv,
    read_summary_json,
    write_detection_csv,
    write_metrics_csv,
    write_summary_json,
)


def test_collector_bins_and_totals() -> None:
    collector = MetricsCollector(bin_ms=100)

    collector.bump("packets_sent", time_ms=5.0)
    collector.bump("packets_sent", time_ms=99.9)
    collector.bump("packets_sent", time_ms=150.0, amount=3)
    collector.bump("packets_forwarded", time_ms=10.0, scope=mote_scope(10))
    collector.bump("packets_forwarded", time_ms=10.0, scope=mote_scope(2))
    collector.bump("attack_drops", time_ms=10.0, scope=attacker_scope(4))

    assert collector.total("packets_sent") == 5
    assert collector.totals_for("global") == {"packets_sent": 5}
    assert collector.scopes("mote:") == ["mote:2", "mote:10"]
    rows = [row for row in collector.rows() if row.scope == "global"]
    assert [(row.time_bin_ms, row.value) for row in rows] == [(0, 2), (100, 3)]


def test_gauges_are_rendered_with_three_decimals() -> None:
    collector = MetricsCollector(bin_ms=100)
    collector.gauge("energy_spent_mj", 1.5, time_ms=1_000.0, scope=mote_scope(0))

    (row,) = collector.rows()

    assert row.time_bin_ms == 1_000
    assert row.formatted_value() == "1.500"


def test_collector_needs_positive_bins() -> None:
    with pytest.raises(ValueError, match="bin_ms"):
        MetricsCollector(bin_ms=0)


def test_report_files_keep_the_column_contract(tmp_path: Path) -> None:
    scenario = build_scenario(
        {
            "topology": {"rows": 1, "cols": 3},
            "traffic": [{"src": 2, "repeat": 3, "interval_ms": 100}],
            "attackers": [{"mote_id": 1, "behavior": "spoof"}],
            "detection": {"enabled": True, "period_ms": 500},
        }
    )
    report = simulate_scenario(scenario)

    metrics_path = write_metrics_csv(report, tmp_path / "metrics.csv")
    detection_path = write_detection_csv(report, tmp_path / "detection.csv")
    summary_path = write_summary_json(report, tmp_path / "summary.json")

    header = metrics_path.read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(METRICS_COLUMNS)
    assert tuple(read_metrics_csv(metrics_path)) == report.rows
    events = read_detection_csv(detection_path)
    assert list(events[0]) == list(DETECTION_COLUMNS)
    assert {event["outcome"] for event in events} == {"altered"}
    summary = read_summary_json(summary_path)
    assert summary["totals"]["altered_rejected"] == 3
    assert summary["detection"]["spoofing_detected"] is True
    assert summary["attackers"]["1"]["attack_modifications"] >= 3
    assert summary["scenario"] is None


def test_metrics_reader_rejects_bad_files(tmp_path: Path) -> None:
    missing = tmp_path / "missing.csv"
    missing.write_text("time_bin_ms,scope,value\n", encoding="utf-8")
    bad_value = tmp_path / "bad.csv"
    bad_value.write_text(
        "time_bin_ms,scope,metric,value\n0,global,packets_sent,many\n", encoding="utf-8"
    )
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")

    with pytest.raises(ValueError, match="missing required columns: metric"):
        read_metrics_csv(missing)
    with pytest.raises(ValueError, match="line 2"):
        read_metrics_csv(bad_value)
    with pytest.raises(ValueError, match="empty"):
        read_metrics_csv(empty)


def test_summary_reader_checks_the_format_version(tmp_path: Path) -> None:
    path = tmp_path / "summary.json"
    path.write_text('{"format_version": 99}', encoding="utf-8")

    with pytest.raises(ValueError, match="format_version"):
        read_summary_json(path)


def test_metric_rows_parse_ints_and_floats(tmp_path: Path) -> None:
    path = tmp_path / "metrics.csv"
    path.write_text(
        "time_bin_ms,scope,metric,value\n"
        "0,global,packets_sent,4\n"
        "1000,mote:1,energy_spent_mj,2.250\n",
        encoding="utf-8",
    )

    assert read_metrics_csv(path) == [
        MetricRow(time_bin_ms=0, scope="global", metric="packets_sent", value=4),
        MetricRow(time_bin_ms=1000, scope="mote:1", metric="energy_spent_mj", value=2.25),
    ]
