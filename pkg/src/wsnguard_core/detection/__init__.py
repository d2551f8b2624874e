"""Sink-driven probe detection of in-network spoofing."""

from .probes import (
    DEFAULT_PAYLOAD_TEMPLATE,
    DEFAULT_PROBE_PERIOD_MS,
    DEFAULT_PROBE_SLACK_MS,
    MAX_PROBE_PAYLOAD,
    DetectionConfig,
    DetectionReport,
    ProbeInjection,
    ProbeOutcome,
    ProbePlan,
    ProbeVerdict,
    ReturnedProbe,
    SinkProbeMonitor,
    UnknownSequence,
    decode_probe,
    default_probe_paths,
    encode_probe,
    evaluate,
    probe_deadline_ms,
    probe_plan_from_config,
    probe_tag,
    round_count,
    schedule_probes,
    verify_probe,
)

__all__ = [
    "DEFAULT_PAYLOAD_TEMPLATE",
    "DEFAULT_PROBE_PERIOD_MS",
    "DEFAULT_PROBE_SLACK_MS",
    "MAX_PROBE_PAYLOAD",
    "DetectionConfig",
    "DetectionReport",
    "ProbeInjection",
    "ProbeOutcome",
    "ProbePlan",
    "ProbeVerdict",
    "ReturnedProbe",
    "SinkProbeMonitor",
    "UnknownSequence",
    "decode_probe",
    "default_probe_paths",
    "encode_probe",
    "evaluate",
    "probe_deadline_ms",
    "probe_plan_from_config",
    "probe_tag",
    "round_count",
    "schedule_probes",
    "verify_probe",
]
