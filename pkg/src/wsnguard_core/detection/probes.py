"""Probe-based spoofing detection run from the sink.

The sink sends tagged check packets around fixed round-trip paths and later verifies that
each came back intact. The tag key never leaves the sink, so a mote that rewrites a probe
cannot produce a matching tag.
"""

from __future__ import annotations

import logging
import math
import struct
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

from pydantic import Field, field_validator

from wsnguard_core.crypto.primitives import TAG_SIZE, Key, Tag, mac, tags_match
from wsnguard_core.netsim.beacon import BeaconRoutes
from wsnguard_core.netsim.packets import MAX_WIRE_PAYLOAD
from wsnguard_core.schemas import DTOBase

logger = logging.getLogger(__name__)

DEFAULT_PROBE_PERIOD_MS = 250.0
DEFAULT_PROBE_SLACK_MS = 200.0
DEFAULT_PAYLOAD_TEMPLATE = b"wsnguard-probe"

_SEQ = struct.Struct(">I")
MAX_PROBE_PAYLOAD = MAX_WIRE_PAYLOAD - _SEQ.size - TAG_SIZE


class UnknownSequence(ValueError):
    pass


class ProbeVerdict(StrEnum):
    CLEAN = "clean"
    ALTERED = "altered"
    MISSING = "missing"


class DetectionConfig(DTOBase):
    enabled: bool = False
    period_ms: float = Field(default=DEFAULT_PROBE_PERIOD_MS, gt=0.0)
    probe_paths: list[list[int]] | None = None
    payload_hex: str = DEFAULT_PAYLOAD_TEMPLATE.hex()
    probe_key_hex: str | None = None
    slack_ms: float = Field(default=DEFAULT_PROBE_SLACK_MS, ge=0.0)
    min_altered: int = Field(default=1, ge=1)

    @field_validator("payload_hex")
    @classmethod
    def validate_payload(cls, value: str) -> str:
        try:
            raw = bytes.fromhex(value)
        except ValueError as exc:
            raise ValueError("payload_hex must be hex encoded") from exc
        if len(raw) > MAX_PROBE_PAYLOAD:
            raise ValueError(f"probe payload exceeds {MAX_PROBE_PAYLOAD} bytes")
        return value.lower()

    @field_validator("probe_key_hex")
    @classmethod
    def validate_key(cls, value: str | None) -> str | None:
        if value is None:
            return None
        Key.from_hex(value)
        return value.lower()

    @property
    def payload_template(self) -> bytes:
        return bytes.fromhex(self.payload_hex)


@dataclass(slots=True, frozen=True)
class ProbePlan:
    probe_paths: tuple[tuple[int, ...], ...]
    period_ms: float
    payload_template: bytes
    probe_key: Key
    sink: int

    def __post_init__(self) -> None:
        if self.period_ms <= 0:
            raise ValueError("period_ms must be > 0")
        if len(self.payload_template) > MAX_PROBE_PAYLOAD:
            raise ValueError(f"probe payload exceeds {MAX_PROBE_PAYLOAD} bytes")
        for index, path in enumerate(self.probe_paths):
            if len(path) < 3 or path[0] != self.sink or path[-1] != self.sink:
                raise ValueError(f"probe path {index} must start and end at sink {self.sink}")


@dataclass(slots=True, frozen=True)
class ProbeInjection:
    time_ms: float
    round_index: int
    path_index: int
    seq: int
    payload: bytes
    tag: Tag

    def encode(self) -> bytes:
        return encode_probe(self.seq, self.payload, self.tag)


@dataclass(slots=True, frozen=True)
class ReturnedProbe:
    seq: int
    payload: bytes
    tag: Tag


@dataclass(slots=True, frozen=True)
class ProbeOutcome:
    time_ms: float
    round_index: int
    path_index: int | None
    seq: int
    verdict: ProbeVerdict

    def as_row(self) -> dict[str, object]:
        return {
            "time_ms": f"{self.time_ms:.3f}",
            "round": self.round_index,
            "path_index": "" if self.path_index is None else self.path_index,
            "seq": self.seq,
            "outcome": self.verdict.value,
        }


class DetectionReport(DTOBase):
    rounds_run: int = 0
    altered_count: int = 0
    missing_count: int = 0
    spoofing_detected: bool = False
    suspected_paths: list[int] = Field(default_factory=list)
    possible_black_hole: bool = False
    advisories: list[str] = Field(default_factory=list)
    first_detection_ms: float | None = None


def probe_tag(key: Key, seq: int, payload: bytes) -> Tag:
    return mac(key, _SEQ.pack(seq) + payload)


def encode_probe(seq: int, payload: bytes, tag: Tag) -> bytes:
    return _SEQ.pack(seq) + payload + bytes(tag)


def decode_probe(data: bytes) -> ReturnedProbe:
    if len(data) < _SEQ.size + TAG_SIZE:
        raise ValueError("probe shorter than its sequence number and tag")
    (seq,) = _SEQ.unpack_from(data)
    return ReturnedProbe(seq=seq, payload=data[_SEQ.size : -TAG_SIZE], tag=Tag(data[-TAG_SIZE:]))


def round_count(period_ms: float, duration_ms: float) -> int:
    return max(1, math.ceil(duration_ms / period_ms))


def schedule_probes(plan: ProbePlan, duration_ms: float) -> list[ProbeInjection]:
    if not plan.probe_paths:
        return []
    injections: list[ProbeInjection] = []
    seq = 0
    for round_index in range(round_count(plan.period_ms, duration_ms)):
        for path_index in range(len(plan.probe_paths)):
            seq += 1
            injections.append(
                ProbeInjection(
                    time_ms=round_index * plan.period_ms,
                    round_index=round_index,
                    path_index=path_index,
                    seq=seq,
                    payload=plan.payload_template,
                    tag=probe_tag(plan.probe_key, seq, plan.payload_template),
                )
            )
    return injections


def verify_probe(
    plan: ProbePlan,
    returned: ReturnedProbe,
    *,
    issued: Iterable[int],
) -> ProbeVerdict:
    if returned.seq not in set(issued):
        raise UnknownSequence(f"probe sequence {returned.seq} was never issued")
    intact = returned.payload == plan.payload_template and tags_match(
        probe_tag(plan.probe_key, returned.seq, returned.payload), returned.tag
    )
    return ProbeVerdict.CLEAN if intact else ProbeVerdict.ALTERED


def probe_deadline_ms(path: Sequence[int], *, hop_latency_ms: float, slack_ms: float) -> float:
    return (len(path) - 1) * hop_latency_ms + slack_ms


def default_probe_paths(routes: BeaconRoutes) -> list[tuple[int, ...]]:
    """One round trip per beacon-tree leaf, deepest leaves first; together they cover every edge."""
    parents = {hop for mote_id, hop in routes.next_hop.items() if mote_id != routes.root}
    leaves = [
        mote_id
        for mote_id in routes.next_hop
        if mote_id != routes.root and mote_id not in parents
    ]
    leaves.sort(key=lambda mote_id: (-routes.hop_distance[mote_id], mote_id))

    covered: set[frozenset[int]] = set()
    paths: list[tuple[int, ...]] = []
    for leaf in leaves:
        upward = routes.path_to_root(leaf)
        if not upward or upward[-1] != routes.root:
            continue
        edges = {frozenset(pair) for pair in zip(upward, upward[1:], strict=False)}
        if edges <= covered:
            continue
        covered |= edges
        paths.append((*reversed(upward), *upward[1:]))
    return paths


def evaluate(
    outcomes: Iterable[ProbeOutcome],
    *,
    min_altered: int = 1,
) -> DetectionReport:
    ordered = sorted(outcomes, key=lambda outcome: (outcome.time_ms, outcome.seq))
    altered = [outcome for outcome in ordered if outcome.verdict == ProbeVerdict.ALTERED]
    missing = [outcome for outcome in ordered if outcome.verdict == ProbeVerdict.MISSING]
    suspected = sorted(
        {
            outcome.path_index
            for outcome in (*altered, *missing)
            if outcome.path_index is not None
        }
    )

    spoofing = len(altered) >= min_altered
    advisories: list[str] = []
    if missing:
        advisories.append(
            f"possible black hole / DOS: {len(missing)} probe(s) never returned"
        )

    return DetectionReport(
        rounds_run=len({outcome.round_index for outcome in ordered if outcome.round_index >= 0}),
        altered_count=len(altered),
        missing_count=len(missing),
        spoofing_detected=spoofing,
        suspected_paths=suspected,
        possible_black_hole=bool(missing),
        advisories=advisories,
        first_detection_ms=altered[min_altered - 1].time_ms if spoofing else None,
    )


@dataclass(slots=True)
class _Pending:
    injection: ProbeInjection
    deadline_ms: float


@dataclass(slots=True)
class SinkProbeMonitor:
    """Sink-side bookkeeping: issued probes, returns, and timeouts."""

    plan: ProbePlan
    hop_latency_ms: float
    slack_ms: float = DEFAULT_PROBE_SLACK_MS
    outcomes: list[ProbeOutcome] = field(default_factory=list)
    _pending: dict[int, _Pending] = field(default_factory=dict)
    _issued: dict[int, ProbeInjection] = field(default_factory=dict)

    def issue(self, injection: ProbeInjection) -> float:
        path = self.plan.probe_paths[injection.path_index]
        deadline = injection.time_ms + probe_deadline_ms(
            path, hop_latency_ms=self.hop_latency_ms, slack_ms=self.slack_ms
        )
        self._issued[injection.seq] = injection
        self._pending[injection.seq] = _Pending(injection=injection, deadline_ms=deadline)
        return deadline

    def on_return(self, data: bytes, *, now_ms: float) -> ProbeOutcome | None:
        try:
            returned = decode_probe(data)
        except ValueError:
            return self._record(now_ms, None, 0, -1, ProbeVerdict.ALTERED)

        try:
            verdict = verify_probe(self.plan, returned, issued=self._issued.keys())
        except UnknownSequence:
            logger.info("probe with unknown sequence seq=%d", returned.seq)
            return self._record(now_ms, None, returned.seq, -1, ProbeVerdict.ALTERED)

        pending = self._pending.pop(returned.seq, None)
        injection = self._issued[returned.seq]
        if pending is None:
            # late or duplicated return of a probe already resolved
            if verdict == ProbeVerdict.CLEAN:
                return None
        return self._record(
            now_ms, injection.path_index, returned.seq, injection.round_index, verdict
        )

    def expire(self, *, now_ms: float) -> list[ProbeOutcome]:
        expired = sorted(
            (seq for seq, pending in self._pending.items() if pending.deadline_ms <= now_ms)
        )
        results: list[ProbeOutcome] = []
        for seq in expired:
            pending = self._pending.pop(seq)
            results.append(
                self._record(
                    pending.deadline_ms,
                    pending.injection.path_index,
                    seq,
                    pending.injection.round_index,
                    ProbeVerdict.MISSING,
                )
            )
        return results

    def report(self, *, min_altered: int = 1) -> DetectionReport:
        return evaluate(self.outcomes, min_altered=min_altered)

    def _record(
        self,
        time_ms: float,
        path_index: int | None,
        seq: int,
        round_index: int,
        verdict: ProbeVerdict,
    ) -> ProbeOutcome:
        outcome = ProbeOutcome(
            time_ms=time_ms,
            round_index=round_index,
            path_index=path_index,
            seq=seq,
            verdict=verdict,
        )
        self.outcomes.append(outcome)
        if verdict != ProbeVerdict.CLEAN:
            logger.info(
                "probe flagged seq=%d path=%s verdict=%s", seq, path_index, verdict.value
            )
        return outcome


def probe_plan_from_config(
    config: DetectionConfig,
    *,
    sink: int,
    routes: BeaconRoutes | None,
    probe_key: Key,
) -> ProbePlan:
    if config.probe_paths is not None:
        paths = [tuple(path) for path in config.probe_paths]
    elif routes is not None:
        paths = default_probe_paths(routes)
    else:
        paths = []
    return ProbePlan(
        probe_paths=tuple(paths),
        period_ms=config.period_ms,
        payload_template=config.payload_template,
        probe_key=probe_key,
        sink=sink,
    )

