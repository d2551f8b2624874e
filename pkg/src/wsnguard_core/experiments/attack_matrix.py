"""Route-corruption susceptibility of the on-demand routing variants.

Every cell runs the same sequence of route discoveries (each mote towards the sink, sharing one
routing state) twice on the canonical grid: once honest, once with the attack in place. A cell
reads "yes" when some honest mote ends up with a route that crosses an attacker, whose advertised
state differs from the honest run's, and that really needs more radio hops than the shortest
attacker-free path. Routes that jump a tunnel or end at an impostor never deliver and count as
infinitely long.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from itertools import pairwise
from pathlib import Path

import networkx as nx

from wsnguard_core.adversary.behaviors import AdversaryRoster, AttackerConfig
from wsnguard_core.netsim.topology import Network, TopologyConfig, build_topology
from wsnguard_core.routing.discovery import DiscoveryContext, Unreachable, discover
from wsnguard_core.routing.table import RouteEntry, RoutingState
from wsnguard_core.schemas import AttackerKind, ModifyTarget, RoutingVariant

from .render import render_table, yes_no

logger = logging.getLogger(__name__)

GRID_SIZE = 5
GRID_SPACING_M = 10.0
GRID_RANGE_M = 10.0
MATRIX_SINK = 0
MATRIX_ATTACKER = 12
WORMHOLE_PEER = 1
MATRIX_SEED = 7

ATTACKS = (
    "spoofing",
    "seq_number_modification",
    "hop_count_modification",
    "source_route_modification",
    "tunneling",
)
VARIANTS = (RoutingVariant.DSR, RoutingVariant.AODV)

EXPECTED_MATRIX: dict[str, dict[RoutingVariant, bool]] = {
    "spoofing": {RoutingVariant.DSR: True, RoutingVariant.AODV: True},
    "seq_number_modification": {RoutingVariant.DSR: False, RoutingVariant.AODV: True},
    "hop_count_modification": {RoutingVariant.DSR: False, RoutingVariant.AODV: True},
    "source_route_modification": {RoutingVariant.DSR: True, RoutingVariant.AODV: False},
    "tunneling": {RoutingVariant.DSR: True, RoutingVariant.AODV: True},
}

MATRIX_JSON = "attack_matrix.json"
MATRIX_CSV = "attack_matrix.csv"


@dataclass(slots=True, frozen=True)
class MatrixCell:
    attack: str
    variant: RoutingVariant
    corrupted: bool
    corrupted_routes: int


@dataclass(slots=True, frozen=True)
class MatrixMismatch:
    attack: str
    variant: RoutingVariant
    expected: bool
    observed: bool


@dataclass(slots=True, frozen=True)
class AttackMatrix:
    cells: tuple[MatrixCell, ...]
    attacks_enabled: bool

    def observed(self, attack: str, variant: RoutingVariant) -> bool:
        for cell in self.cells:
            if cell.attack == attack and cell.variant == variant:
                return cell.corrupted
        raise KeyError(f"no cell for attack={attack} variant={variant.value}")

    def as_dict(self) -> dict[str, dict[str, bool]]:
        return {
            attack: {variant.value: self.observed(attack, variant) for variant in VARIANTS}
            for attack in ATTACKS
        }


def canonical_network() -> Network:
    config = TopologyConfig(
        layout="grid",
        rows=GRID_SIZE,
        cols=GRID_SIZE,
        spacing_m=GRID_SPACING_M,
        radio_range_m=GRID_RANGE_M,
        sink_id=MATRIX_SINK,
    )
    return build_topology(config, seed=MATRIX_SEED)


def attack_configs(attack: str) -> list[AttackerConfig]:
    if attack == "spoofing":
        return [
            AttackerConfig(
                mote_id=MATRIX_ATTACKER, behavior=AttackerKind.SPOOF, impersonate=MATRIX_SINK
            )
        ]
    if attack == "tunneling":
        return [
            AttackerConfig(
                mote_id=MATRIX_ATTACKER, behavior=AttackerKind.WORMHOLE, peer=WORMHOLE_PEER
            ),
            AttackerConfig(
                mote_id=WORMHOLE_PEER, behavior=AttackerKind.WORMHOLE, peer=MATRIX_ATTACKER
            ),
        ]
    targets = {
        "seq_number_modification": ModifyTarget.SEQ_NO,
        "hop_count_modification": ModifyTarget.HOP_COUNT,
        "source_route_modification": ModifyTarget.SOURCE_ROUTE,
    }
    if attack not in targets:
        raise ValueError(f"unknown attack: {attack}")
    return [
        AttackerConfig(
            mote_id=MATRIX_ATTACKER,
            behavior=AttackerKind.FIELD_MODIFY,
            target_field=targets[attack],
        )
    ]


def discover_all(
    network: Network,
    *,
    variant: RoutingVariant,
    adversary: AdversaryRoster | None,
) -> dict[tuple[int, int], RouteEntry]:
    """Every mote discovers a route to the sink, in id order, over one shared routing state."""
    context = DiscoveryContext(state=RoutingState(), adversary=adversary)
    for mote_id in network.mote_ids:
        if mote_id == network.sink_id:
            continue
        try:
            discover(network, mote_id, network.sink_id, variant=variant, context=context)
        except Unreachable:
            logger.debug("matrix discovery unreachable variant=%s src=%d", variant.value, mote_id)
    return context.state.snapshot()


def usable_hops(network: Network, entry: RouteEntry, *, owner: int) -> float:
    """Radio hops a packet really needs on this route; inf when the route cannot deliver."""
    path = entry.source_route if entry.variant == RoutingVariant.DSR else entry.physical_path
    if len(path) < 2 or path[0] != owner or path[-1] != entry.destination:
        return math.inf
    if not all(network.has_link(sender, receiver) for sender, receiver in pairwise(path)):
        return math.inf
    return len(path) - 1


def honest_hops(network: Network, src: int, dst: int, *, attackers: list[int]) -> float:
    """Shortest path length over motes that are not attackers; inf when none exists."""
    honest = network.graph.subgraph(
        mote_id for mote_id in network.mote_ids if mote_id not in attackers
    )
    try:
        return nx.shortest_path_length(honest, src, dst)
    except (nx.NetworkXNoPath, nx.NodeNotFound):
        return math.inf


def corrupted_routes(
    network: Network,
    baseline: dict[tuple[int, int], RouteEntry],
    attacked: dict[tuple[int, int], RouteEntry],
    *,
    attackers: list[int],
) -> list[tuple[int, int]]:
    corrupted: list[tuple[int, int]] = []
    for key, entry in sorted(attacked.items()):
        owner, destination = key
        if owner in attackers or not entry.traverses(attackers):
            continue
        honest = baseline.get(key)
        if honest is not None and honest.claimed_state() == entry.claimed_state():
            continue
        shortest = honest_hops(network, owner, destination, attackers=attackers)
        if shortest < usable_hops(network, entry, owner=owner):
            corrupted.append(key)
    return corrupted


def evaluate_cell(
    attack: str, variant: RoutingVariant, *, attacks_enabled: bool = True
) -> MatrixCell:
    network = canonical_network()
    baseline = discover_all(network, variant=variant, adversary=None)
    configs = attack_configs(attack)
    roster = AdversaryRoster.from_configs(configs if attacks_enabled else [], seed=MATRIX_SEED)
    attacked = discover_all(network, variant=variant, adversary=roster)
    corrupted = corrupted_routes(
        network, baseline, attacked, attackers=[config.mote_id for config in configs]
    )
    logger.info(
        "matrix cell attack=%s variant=%s corrupted_routes=%d",
        attack,
        variant.value,
        len(corrupted),
    )
    return MatrixCell(
        attack=attack,
        variant=variant,
        corrupted=bool(corrupted),
        corrupted_routes=len(corrupted),
    )


def build_attack_matrix(*, attacks_enabled: bool = True) -> AttackMatrix:
    cells = tuple(
        evaluate_cell(attack, variant, attacks_enabled=attacks_enabled)
        for attack in ATTACKS
        for variant in VARIANTS
    )
    return AttackMatrix(cells=cells, attacks_enabled=attacks_enabled)


def diff_against_expected(matrix: AttackMatrix) -> list[MatrixMismatch]:
    mismatches: list[MatrixMismatch] = []
    for cell in matrix.cells:
        expected = EXPECTED_MATRIX[cell.attack][cell.variant]
        if expected != cell.corrupted:
            mismatches.append(
                MatrixMismatch(
                    attack=cell.attack,
                    variant=cell.variant,
                    expected=expected,
                    observed=cell.corrupted,
                )
            )
    return mismatches


def render_matrix_table(matrix: AttackMatrix) -> str:
    headers = ("attack", *(variant.value for variant in VARIANTS))
    rows = [
        (attack, *(yes_no(matrix.observed(attack, variant)) for variant in VARIANTS))
        for attack in ATTACKS
    ]
    return render_table(headers=headers, rows=rows)


def render_diff(mismatches: list[MatrixMismatch]) -> str:
    if not mismatches:
        return "matrix matches expected susceptibility table"
    lines = [f"{len(mismatches)} cell(s) differ from expected susceptibility table:"]
    lines.extend(
        f"  {item.attack} / {item.variant.value}: "
        f"expected {yes_no(item.expected)}, observed {yes_no(item.observed)}"
        for item in mismatches
    )
    return "\n".join(lines)


def write_attack_matrix(matrix: AttackMatrix, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    mismatches = diff_against_expected(matrix)
    payload = {
        "attacks_enabled": matrix.attacks_enabled,
        "topology": {
            "rows": GRID_SIZE,
            "cols": GRID_SIZE,
            "spacing_m": GRID_SPACING_M,
            "radio_range_m": GRID_RANGE_M,
            "sink": MATRIX_SINK,
            "attacker": MATRIX_ATTACKER,
        },
        "matrix": matrix.as_dict(),
        "corrupted_routes": {
            f"{cell.attack}/{cell.variant.value}": cell.corrupted_routes for cell in matrix.cells
        },
        "mismatches": [
            {
                "attack": item.attack,
                "variant": item.variant.value,
                "expected": item.expected,
                "observed": item.observed,
            }
            for item in mismatches
        ],
    }
    json_path = out_dir / MATRIX_JSON
    json_path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")

    csv_path = out_dir / MATRIX_CSV
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("attack", *(variant.value for variant in VARIANTS)))
        for attack in ATTACKS:
            writer.writerow(
                (attack, *(yes_no(matrix.observed(attack, variant)) for variant in VARIANTS))
            )
    return json_path, csv_path


def read_attack_matrix_csv(path: Path) -> dict[str, dict[str, bool]]:
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        expected_columns = ["attack", *(variant.value for variant in VARIANTS)]
        if reader.fieldnames is None or list(reader.fieldnames) != expected_columns:
            raise ValueError(f"attack matrix csv must have columns: {','.join(expected_columns)}")
        return {
            row["attack"]: {variant.value: row[variant.value] == "yes" for variant in VARIANTS}
            for row in reader
        }
