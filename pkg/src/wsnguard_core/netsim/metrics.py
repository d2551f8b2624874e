"""Metric collection and the stable on-disk formats.

metrics.csv   one row per (time_bin_ms, scope, metric) with its value
summary.json  run totals, per-mote energy, attacker counters, detection report, scenario echo
detection.csv one row per probe outcome
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

SUMMARY_FORMAT_VERSION = 1
GLOBAL_SCOPE = "global"
METRICS_COLUMNS = ("time_bin_ms", "scope", "metric", "value")
DETECTION_COLUMNS = ("time_ms", "round", "path_index", "seq", "outcome")


def mote_scope(mote_id: int) -> str:
    return f"mote:{mote_id}"


def attacker_scope(mote_id: int) -> str:
    return f"attacker:{mote_id}"


@dataclass(slots=True, frozen=True)
class MetricRow:
    time_bin_ms: int
    scope: str
    metric: str
    value: int | float

    def formatted_value(self) -> str:
        if isinstance(self.value, float):
            return f"{self.value:.3f}"
        return str(self.value)


@dataclass(slots=True)
class MetricsCollector:
    bin_ms: int
    _counts: defaultdict[tuple[int, str, str], int] = field(
        default_factory=lambda: defaultdict(int)
    )
    _gauges: dict[tuple[int, str, str], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.bin_ms <= 0:
            raise ValueError("bin_ms must be > 0")

    def bump(
        self,
        metric: str,
        *,
        time_ms: float,
        scope: str = GLOBAL_SCOPE,
        amount: int = 1,
    ) -> None:
        self._counts[(self._bin(time_ms), scope, metric)] += amount

    def gauge(self, metric: str, value: float, *, time_ms: float, scope: str) -> None:
        self._gauges[(self._bin(time_ms), scope, metric)] = value

    def total(self, metric: str, *, scope: str = GLOBAL_SCOPE) -> int:
        return sum(
            value
            for (_, row_scope, row_metric), value in self._counts.items()
            if row_scope == scope and row_metric == metric
        )

    def totals_for(self, scope: str) -> dict[str, int]:
        totals: defaultdict[str, int] = defaultdict(int)
        for (_, row_scope, metric), value in self._counts.items():
            if row_scope == scope:
                totals[metric] += value
        return dict(sorted(totals.items()))

    def scopes(self, prefix: str) -> list[str]:
        found = {scope for (_, scope, _) in self._counts if scope.startswith(prefix)}
        return sorted(found, key=_scope_sort_key)

    def rows(self) -> list[MetricRow]:
        rows = [
            MetricRow(time_bin_ms=bin_ms, scope=scope, metric=metric, value=value)
            for (bin_ms, scope, metric), value in self._counts.items()
        ]
        rows.extend(
            MetricRow(time_bin_ms=bin_ms, scope=scope, metric=metric, value=value)
            for (bin_ms, scope, metric), value in self._gauges.items()
        )
        return sorted(
            rows, key=lambda row: (row.time_bin_ms, _scope_sort_key(row.scope), row.metric)
        )

    def _bin(self, time_ms: float) -> int:
        return int(time_ms // self.bin_ms) * self.bin_ms


@dataclass(slots=True, frozen=True)
class FlowStats:
    sent: int
    delivered: int
    dropped: int


@dataclass(slots=True, frozen=True)
class MetricsReport:
    seed: int
    end_time_ms: int
    totals: dict[str, int]
    flows: dict[str, FlowStats]
    energy_spent_uj: dict[int, int]
    energy_remaining_uj: dict[int, int]
    energy_by_category: dict[int, dict[str, int]]
    dead_motes: tuple[int, ...]
    per_mote: dict[int, dict[str, int]]
    per_attacker: dict[int, dict[str, int]]
    neighbor_table_size: dict[int, int]
    unreachable: tuple[int, ...]
    rows: tuple[MetricRow, ...]
    detection: dict[str, Any] | None = None
    detection_events: tuple[dict[str, Any], ...] = ()

    def total(self, metric: str) -> int:
        return self.totals.get(metric, 0)

    def energy_spent_mj(self, mote_id: int) -> float:
        return round(self.energy_spent_uj.get(mote_id, 0) / 1000, 3)

    def mote_counter(self, mote_id: int, metric: str) -> int:
        return self.per_mote.get(mote_id, {}).get(metric, 0)


def summary_payload(report: MetricsReport, *, scenario: dict[str, Any] | None) -> dict[str, Any]:
    total_spent = sum(report.energy_spent_uj.values())
    return {
        "format_version": SUMMARY_FORMAT_VERSION,
        "seed": report.seed,
        "end_time_ms": report.end_time_ms,
        "totals": dict(report.totals),
        "flows": {
            name: {"sent": stats.sent, "delivered": stats.delivered, "dropped": stats.dropped}
            for name, stats in report.flows.items()
        },
        "energy": {
            "total_spent_mj": round(total_spent / 1000, 3),
            "motes": {
                str(mote_id): {
                    "spent_mj": round(spent / 1000, 3),
                    "remaining_mj": round(report.energy_remaining_uj.get(mote_id, 0) / 1000, 3),
                    "by_category_mj": {
                        category: round(value / 1000, 3)
                        for category, value in report.energy_by_category.get(mote_id, {}).items()
                    },
                }
                for mote_id, spent in report.energy_spent_uj.items()
            },
        },
        "dead_motes": list(report.dead_motes),
        "motes": {str(mote_id): counters for mote_id, counters in report.per_mote.items()},
        "attackers": {
            str(mote_id): counters for mote_id, counters in report.per_attacker.items()
        },
        "neighbor_table_size": {
            str(mote_id): size for mote_id, size in report.neighbor_table_size.items()
        },
        "unreachable": list(report.unreachable),
        "detection": report.detection,
        "scenario": scenario,
    }


def write_metrics_csv(report: MetricsReport, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for row in report.rows:
            writer.writerow((row.time_bin_ms, row.scope, row.metric, row.formatted_value()))
    return path


def write_summary_json(
    report: MetricsReport,
    path: Path,
    *,
    scenario: dict[str, Any] | None = None,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = summary_payload(report, scenario=scenario)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path


def write_detection_csv(report: MetricsReport, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=DETECTION_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for event in report.detection_events:
            writer.writerow({column: event[column] for column in DETECTION_COLUMNS})
    return path


def read_metrics_csv(path: Path) -> list[MetricRow]:
    rows: list[MetricRow] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValueError("metrics csv is empty")
        missing = [column for column in METRICS_COLUMNS if column not in reader.fieldnames]
        if missing:
            raise ValueError(f"metrics csv missing required columns: {', '.join(missing)}")

        for line_number, row in enumerate(reader, start=2):
            try:
                time_bin = int(row["time_bin_ms"])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"invalid time_bin_ms on line {line_number}") from exc
            scope = (row.get("scope") or "").strip()
            metric = (row.get("metric") or "").strip()
            if not scope or not metric:
                raise ValueError(f"empty scope or metric on line {line_number}")
            rows.append(
                MetricRow(
                    time_bin_ms=time_bin,
                    scope=scope,
                    metric=metric,
                    value=_parse_value(row.get("value"), line_number=line_number),
                )
            )
    return rows


def read_summary_json(path: Path) -> dict[str, Any]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(payload, dict):
        raise ValueError("summary root must be an object")
    if payload.get("format_version") != SUMMARY_FORMAT_VERSION:
        raise ValueError(f"unsupported summary format_version: {payload.get('format_version')}")
    return payload


def read_detection_csv(path: Path) -> list[dict[str, str]]:
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or list(reader.fieldnames) != list(DETECTION_COLUMNS):
            raise ValueError(f"detection csv must have columns: {','.join(DETECTION_COLUMNS)}")
        return list(reader)


def _parse_value(raw: str | None, *, line_number: int) -> int | float:
    text = (raw or "").strip()
    try:
        if "." in text:
            return float(text)
        return int(text)
    except ValueError as exc:
        raise ValueError(f"invalid metric value on line {line_number}: {text!r}") from exc


def _scope_sort_key(scope: str) -> tuple[str, int]:
    kind, _, suffix = scope.partition(":")
    return (kind, int(suffix) if suffix.isdigit() else -1)
