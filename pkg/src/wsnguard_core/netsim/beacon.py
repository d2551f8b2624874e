from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import networkx as nx

from .topology import Network

logger = logging.getLogger(__name__)

_VIRTUAL_ROOT = -1


@dataclass(slots=True, frozen=True)
class BeaconRoutes:
    root: int
    next_hop: dict[int, int]
    hop_distance: dict[int, int]
    unreachable: tuple[int, ...]
    honest_next_hop: dict[int, int] = field(default_factory=dict)

    def path_to_root(self, mote_id: int) -> list[int]:
        if mote_id not in self.next_hop:
            return []
        path = [mote_id]
        while path[-1] != self.root:
            following = self.next_hop[path[-1]]
            if following in path:
                break
            path.append(following)
        return path


def beacon_tree_route(
    network: Network,
    sink: int | None = None,
    *,
    advertised: Mapping[int, int] | None = None,
    tunnels: Iterable[tuple[int, int]] = (),
) -> BeaconRoutes:
    """Breadth-first hop tree rooted at the sink.

    `advertised` maps a mote to the hop distance it claims in its beacons; `tunnels` adds
    out-of-band links that relay beacons between two motes.
    """
    root = network.sink_id if sink is None else sink
    tunnel_links = [tuple(link) for link in tunnels]
    honest = _distances(network, root=root, advertised={}, tunnels=tunnel_links)
    claimed = dict(advertised or {})
    observed = (
        _distances(network, root=root, advertised=claimed, tunnels=tunnel_links)
        if claimed
        else honest
    )

    links = _link_graph(network, tunnel_links)
    honest_next_hop = _next_hops(links, root=root, distances=honest)
    observed_next_hop = _next_hops(links, root=root, distances=observed)
    # a mote advertising a fake distance still forwards along its honest tree
    next_hop = {
        mote_id: honest_next_hop.get(mote_id, hop) if mote_id in claimed else hop
        for mote_id, hop in observed_next_hop.items()
    }
    next_hop = dict(sorted(next_hop.items()))

    alive = [mote.id for mote in network.motes() if mote.alive]
    unreachable = tuple(mote_id for mote_id in alive if mote_id not in next_hop)
    if unreachable:
        logger.info("beacon tree root=%d unreachable=%s", root, list(unreachable))

    return BeaconRoutes(
        root=root,
        next_hop=next_hop,
        hop_distance={mote_id: observed[mote_id] for mote_id in next_hop},
        unreachable=unreachable,
        honest_next_hop=honest_next_hop,
    )


def _next_hops(links: nx.Graph, *, root: int, distances: Mapping[int, int]) -> dict[int, int]:
    """Lowest-id neighbor strictly closer to the root, per mote."""
    next_hop: dict[int, int] = {}
    if root in distances:
        next_hop[root] = root
    for mote_id in sorted(distances):
        if mote_id == root:
            continue
        closer = [
            (distances[other], other)
            for other in sorted(links.neighbors(mote_id))
            if other in distances and distances[other] < distances[mote_id]
        ]
        if closer:
            next_hop[mote_id] = min(closer)[1]
    return next_hop


def _link_graph(network: Network, tunnels: list[tuple[int, ...]]) -> nx.Graph:
    alive = [mote.id for mote in network.motes() if mote.alive]
    graph = nx.Graph(network.graph.subgraph(alive))
    for left, right in tunnels:
        if left in graph and right in graph:
            graph.add_edge(left, right)
    return graph


def _distances(
    network: Network,
    *,
    root: int,
    advertised: Mapping[int, int],
    tunnels: list[tuple[int, ...]],
) -> dict[int, int]:
    graph = _link_graph(network, tunnels)
    if root not in graph:
        return {}
    nx.set_edge_attributes(graph, 1, "weight")
    graph.add_edge(_VIRTUAL_ROOT, root, weight=0)
    for mote_id, hops in advertised.items():
        if mote_id in graph and mote_id != root:
            graph.add_edge(_VIRTUAL_ROOT, mote_id, weight=max(hops, 0))
    lengths = nx.single_source_dijkstra_path_length(graph, _VIRTUAL_ROOT, weight="weight")
    lengths.pop(_VIRTUAL_ROOT, None)
    return {mote_id: int(length) for mote_id, length in lengths.items()}
