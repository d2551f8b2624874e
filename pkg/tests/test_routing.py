from __future__ import annotations

import networkx as nx
import pytest

from wsnguard_core.adversary.behaviors import AdversaryRoster, AttackerConfig
from wsnguard_core.experiments.effects import honest_hop_distance
from wsnguard_core.netsim.topology import Network, TopologyConfig, build_topology
from wsnguard_core.routing.discovery import (
    DiscoveryContext,
    Unreachable,
    aodv_discover,
    discover,
    dsr_discover,
    forward_source_routed,
)
from wsnguard_core.routing.messages import (
    AodvReply,
    DsrRequest,
    decode_route_message,
)
from wsnguard_core.routing.table import (
    RouteEntry,
    RoutingTable,
    accepts_candidate,
    install_route,
)
from wsnguard_core.schemas import AttackerKind, ModifyTarget, RoutingVariant


def _grid(rows: int, cols: int) -> Network:
    config = TopologyConfig(rows=rows, cols=cols, spacing_m=10.0, radio_range_m=10.0)
    return build_topology(config)


def _context(*configs: AttackerConfig) -> DiscoveryContext:
    roster = AdversaryRoster.from_configs(list(configs), seed=1) if configs else None
    return DiscoveryContext(adversary=roster)


def test_aodv_finds_the_line_route() -> None:
    entry = aodv_discover(_grid(1, 3), 2, 0)

    assert entry.next_hop == 1
    assert entry.hop_count == 2
    assert entry.dest_seq >= 1
    assert entry.physical_path == (2, 1, 0)


def test_dsr_finds_the_line_route() -> None:
    entry = dsr_discover(_grid(1, 3), 2, 0)

    assert entry.source_route == (2, 1, 0)
    assert entry.hop_count == 2
    assert entry.next_hop == 1


def test_grid_discovery_finds_a_shortest_route() -> None:
    network = _grid(5, 5)

    for variant in (RoutingVariant.AODV, RoutingVariant.DSR):
        entry = discover(network, 24, 0, variant=variant)
        assert entry.hop_count == nx.shortest_path_length(network.graph, 24, 0)


def test_partitioned_network_is_unreachable() -> None:
    network = _grid(1, 3)
    network.mote(1).energy_uj = 0

    with pytest.raises(Unreachable):
        aodv_discover(network, 2, 0)
    with pytest.raises(Unreachable):
        dsr_discover(network, 2, 0)


def test_beacon_tree_has_no_discovery() -> None:
    with pytest.raises(ValueError, match="no discovery"):
        discover(_grid(1, 2), 1, 0, variant=RoutingVariant.BEACON_TREE)


def test_transmit_hook_sees_every_control_packet() -> None:
    sent: list[tuple[int, tuple[int, ...]]] = []
    context = DiscoveryContext(
        on_transmit=lambda sender, receivers, packet: sent.append((sender, tuple(receivers)))
    )

    aodv_discover(_grid(1, 3), 2, 0, context=context)

    assert (2, (1,)) in sent
    assert (1, (0, 2)) in sent
    assert (0, (1,)) in sent


def test_wormhole_makes_far_motes_look_close() -> None:
    network = _grid(5, 5)
    context = _context(
        AttackerConfig(mote_id=1, behavior=AttackerKind.WORMHOLE, peer=23),
        AttackerConfig(mote_id=23, behavior=AttackerKind.WORMHOLE, peer=1),
    )

    entry = aodv_discover(network, 24, 0, context=context)

    assert honest_hop_distance(network, 24, 0) == 8
    assert entry.hop_count <= 2
    assert entry.traverses([1, 23])


def test_spoofed_sink_answers_with_forged_freshness() -> None:
    network = _grid(1, 5)
    context = _context(
        AttackerConfig(mote_id=2, behavior=AttackerKind.SPOOF, impersonate=0)
    )

    entry = aodv_discover(network, 4, 0, context=context)

    assert entry.dest_seq == 100
    assert entry.hop_count == 2
    assert entry.physical_path == (4, 3, 2)


def test_sequence_rewrite_corrupts_aodv_only() -> None:
    network = _grid(1, 5)
    attacker = AttackerConfig(
        mote_id=2, behavior=AttackerKind.FIELD_MODIFY, target_field=ModifyTarget.SEQ_NO
    )

    honest = aodv_discover(network, 4, 0)
    attacked = aodv_discover(network, 4, 0, context=_context(attacker))
    assert attacked.dest_seq == honest.dest_seq + 100

    honest_dsr = dsr_discover(network, 4, 0)
    attacked_dsr = dsr_discover(network, 4, 0, context=_context(attacker))
    assert attacked_dsr.claimed_state() == honest_dsr.claimed_state()


def test_source_route_truncation_breaks_forwarding() -> None:
    network = _grid(1, 5)
    attacker = AttackerConfig(
        mote_id=2, behavior=AttackerKind.FIELD_MODIFY, target_field=ModifyTarget.SOURCE_ROUTE
    )

    entry = dsr_discover(network, 4, 0, context=_context(attacker))

    assert entry.source_route == (4, 2, 1, 0)
    assert entry.hop_count == 3
    result = forward_source_routed(network, entry.source_route)
    assert not result.delivered
    assert result.route_error is not None
    assert result.route_error.reporter == 4
    assert result.route_error.unreachable_next == 2


def test_forward_source_routed_reports_dead_hops() -> None:
    network = _grid(1, 4)

    assert forward_source_routed(network, (3, 2, 1, 0)).reached == (3, 2, 1, 0)

    network.mote(1).energy_uj = 0
    result = forward_source_routed(network, (3, 2, 1, 0))
    assert result.reached == (3, 2)
    assert result.route_error is not None
    assert result.route_error.reporter == 2


def _aodv(next_hop: int, hop_count: int, dest_seq: int) -> RouteEntry:
    return RouteEntry(
        destination=0,
        variant=RoutingVariant.AODV,
        next_hop=next_hop,
        hop_count=hop_count,
        dest_seq=dest_seq,
    )


def test_fresher_sequence_beats_shorter_route() -> None:
    existing = _aodv(1, 2, 5)
    fresher = _aodv(3, 6, 6)
    shorter = _aodv(4, 1, 5)
    stale = _aodv(4, 1, 4)

    assert accepts_candidate(existing, fresher)
    assert accepts_candidate(existing, shorter)
    assert not accepts_candidate(existing, stale)
    assert accepts_candidate(None, stale)


def test_dsr_prefers_shorter_source_routes() -> None:
    long_route = RouteEntry(
        destination=0,
        variant=RoutingVariant.DSR,
        next_hop=3,
        hop_count=3,
        source_route=(4, 3, 2, 0),
    )
    short_route = RouteEntry(
        destination=0, variant=RoutingVariant.DSR, next_hop=2, hop_count=2, source_route=(4, 2, 0)
    )

    assert accepts_candidate(long_route, short_route)
    assert not accepts_candidate(short_route, long_route)


def test_expired_routes_do_not_block_installs() -> None:
    table = RoutingTable(owner=4)
    old = RouteEntry(
        destination=0,
        variant=RoutingVariant.AODV,
        next_hop=3,
        hop_count=1,
        dest_seq=9,
        lifetime_ms=100.0,
    )
    install_route(table, old)
    worse = _aodv(2, 5, 1)

    assert not install_route(table, worse, now_ms=50.0)
    assert table.lookup(0, now_ms=150.0) is None
    assert install_route(table, worse, now_ms=150.0)
    assert table.lookup(0).next_hop == 2


def test_route_messages_keep_their_fields() -> None:
    reply = AodvReply(
        origin=4, target=0, request_id=7, dest_seq=12, hop_count=3, lifetime_ms=5000
    )
    request = DsrRequest(origin=4, target=0, request_id=7, route_record=(4, 3))

    assert decode_route_message(reply.encode()) == reply
    assert decode_route_message(request.encode()) == request
    assert len(reply.encode()) == 16
    with pytest.raises(ValueError, match="unknown route-control code"):
        decode_route_message(b"\x7f")
