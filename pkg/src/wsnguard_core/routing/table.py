from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field

from wsnguard_core.schemas import RoutingVariant

logger = logging.getLogger(__name__)

DEFAULT_ROUTE_LIFETIME_MS = 5_000.0


@dataclass(slots=True, frozen=True)
class RouteEntry:
    """One installed route.

    `physical_path` is the mote sequence the advertisement really crossed, which can differ
    from what the route claims once an attacker has rewritten it.
    """

    destination: int
    variant: RoutingVariant
    next_hop: int
    hop_count: int
    dest_seq: int = 0
    source_route: tuple[int, ...] = ()
    lifetime_ms: float = DEFAULT_ROUTE_LIFETIME_MS
    installed_at_ms: float = 0.0
    physical_path: tuple[int, ...] = ()

    @property
    def expires_at_ms(self) -> float:
        return self.installed_at_ms + self.lifetime_ms

    def expired(self, now_ms: float) -> bool:
        return now_ms >= self.expires_at_ms

    def traverses(self, mote_ids: Iterable[int]) -> bool:
        watched = set(mote_ids)
        return any(mote_id in watched for mote_id in self.physical_path[1:])

    def claimed_state(self) -> tuple[int, int, int, tuple[int, ...]]:
        return (self.next_hop, self.hop_count, self.dest_seq, self.source_route)


def accepts_candidate(existing: RouteEntry | None, candidate: RouteEntry) -> bool:
    if existing is None:
        return True
    if candidate.variant == RoutingVariant.DSR:
        return len(candidate.source_route) < len(existing.source_route)
    if candidate.dest_seq != existing.dest_seq:
        return candidate.dest_seq > existing.dest_seq
    return candidate.hop_count < existing.hop_count


@dataclass(slots=True)
class RoutingTable:
    owner: int
    entries: dict[int, RouteEntry] = field(default_factory=dict)

    def lookup(self, destination: int, *, now_ms: float | None = None) -> RouteEntry | None:
        entry = self.entries.get(destination)
        if entry is None:
            return None
        if now_ms is not None and entry.expired(now_ms):
            return None
        return entry

    def remove(self, destination: int) -> None:
        self.entries.pop(destination, None)

    def __len__(self) -> int:
        return len(self.entries)


def install_route(
    table: RoutingTable,
    candidate: RouteEntry,
    *,
    now_ms: float | None = None,
) -> bool:
    """Install `candidate` if it beats the current entry; expired entries never block."""
    existing = table.lookup(candidate.destination, now_ms=now_ms)
    if not accepts_candidate(existing, candidate):
        return False
    table.entries[candidate.destination] = candidate
    logger.debug(
        "route installed owner=%d dst=%d next=%d hops=%d seq=%d",
        table.owner,
        candidate.destination,
        candidate.next_hop,
        candidate.hop_count,
        candidate.dest_seq,
    )
    return True


@dataclass(slots=True)
class RoutingState:
    """Per-mote routing tables plus the counters on-demand discovery needs."""

    tables: dict[int, RoutingTable] = field(default_factory=dict)
    sequence_numbers: defaultdict[int, int] = field(default_factory=lambda: defaultdict(int))
    request_ids: defaultdict[int, int] = field(default_factory=lambda: defaultdict(int))

    def table(self, mote_id: int) -> RoutingTable:
        table = self.tables.get(mote_id)
        if table is None:
            table = RoutingTable(owner=mote_id)
            self.tables[mote_id] = table
        return table

    def next_request_id(self, origin: int) -> int:
        self.request_ids[origin] = (self.request_ids[origin] + 1) & 0xFFFF
        return self.request_ids[origin]

    def bump_sequence(self, mote_id: int) -> int:
        self.sequence_numbers[mote_id] += 1
        return self.sequence_numbers[mote_id]

    def sequence_of(self, mote_id: int) -> int:
        return self.sequence_numbers[mote_id]

    def snapshot(self) -> dict[tuple[int, int], RouteEntry]:
        return {
            (owner, destination): entry
            for owner, table in sorted(self.tables.items())
            for destination, entry in sorted(table.entries.items())
        }
