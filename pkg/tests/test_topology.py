from __future__ import annotations

import pytest
from pydantic import ValidationError

from wsnguard_core.netsim.topology import (
    InvalidConfig,
    MotePlacement,
    TopologyConfig,
    build_topology,
    neighbor_table,
)
from wsnguard_core.schemas import MoteRole


def _explicit(
    *positions: tuple[int, float, float], radio_range_m: float = 10.0
) -> TopologyConfig:
    return TopologyConfig(
        layout="explicit",
        motes=[MotePlacement(id=mote_id, x=x, y=y) for mote_id, x, y in positions],
        radio_range_m=radio_range_m,
        sink_id=positions[0][0],
    )


def test_motes_within_range_are_linked() -> None:
    network = build_topology(_explicit((0, 0.0, 0.0), (1, 5.0, 0.0)))

    assert network.has_link(0, 1)
    assert network.has_link(1, 0)


def test_motes_out_of_range_are_not_linked() -> None:
    network = build_topology(_explicit((0, 0.0, 0.0), (1, 15.0, 0.0)))

    assert not network.has_link(0, 1)
    assert network.neighbors(0) == []


def test_link_needs_both_ranges() -> None:
    config = TopologyConfig(
        layout="explicit",
        motes=[
            MotePlacement(id=0, x=0.0, y=0.0, radio_range_m=20.0),
            MotePlacement(id=1, x=15.0, y=0.0),
        ],
        radio_range_m=10.0,
        sink_id=0,
    )

    assert not build_topology(config).has_link(0, 1)


def test_grid_degrees() -> None:
    network = build_topology(TopologyConfig(rows=3, cols=3, spacing_m=10.0, radio_range_m=10.0))

    degrees = {mote_id: len(network.neighbors(mote_id)) for mote_id in network.mote_ids}

    assert [degrees[corner] for corner in (0, 2, 6, 8)] == [2, 2, 2, 2]
    assert [degrees[edge] for edge in (1, 3, 5, 7)] == [3, 3, 3, 3]
    assert degrees[4] == 4


def test_sink_role_and_energy_are_set() -> None:
    network = build_topology(TopologyConfig(rows=1, cols=2, initial_energy_mj=2.5))

    assert network.mote(0).role == MoteRole.SINK
    assert network.mote(1).role == MoteRole.HONEST
    assert network.mote(1).energy_uj == 2_500
    assert network.mote(1).energy_mj == pytest.approx(2.5)


def test_random_layout_is_seeded() -> None:
    config = TopologyConfig(layout="random", count=12, area_m=40.0)

    first = build_topology(config, seed=3)
    second = build_topology(config, seed=3)

    assert [mote.position for mote in first.motes()] == [
        mote.position for mote in second.motes()
    ]
    assert sorted(first.graph.edges) == sorted(second.graph.edges)


def test_build_topology_rejects_bad_configs() -> None:
    with pytest.raises(InvalidConfig, match="zero motes"):
        build_topology(TopologyConfig(layout="explicit", motes=[]))
    with pytest.raises(InvalidConfig, match="duplicate"):
        build_topology(_explicit((0, 0.0, 0.0), (0, 1.0, 0.0)))
    with pytest.raises(InvalidConfig, match="no sink"):
        build_topology(TopologyConfig(rows=1, cols=2, sink_id=7))


def test_negative_range_is_a_validation_error() -> None:
    with pytest.raises(ValidationError):
        TopologyConfig(radio_range_m=-1.0)
    with pytest.raises(ValidationError):
        MotePlacement(id=0, x=0.0, y=0.0, radio_range_m=-2.0)


def test_neighbor_table_includes_claimed_and_boosted_identities() -> None:
    network = build_topology(TopologyConfig(rows=1, cols=4, spacing_m=10.0))
    network.claim_identities(2, [100, 101])

    assert neighbor_table(network, 1) == [0, 2, 100, 101]
    assert neighbor_table(network, 0, heard_from=[3]) == [1, 3]
    assert network.owner_of(101) == 2
    assert network.owner_of(3) == 3
    assert network.owner_of(999) is None


def test_dead_neighbors_drop_out_of_the_table() -> None:
    network = build_topology(TopologyConfig(rows=1, cols=3))
    network.mote(2).energy_uj = 0

    assert neighbor_table(network, 1) == [0]
