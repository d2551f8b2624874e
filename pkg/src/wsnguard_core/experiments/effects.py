"""Attack effect sizes measured against honest baselines."""

from __future__ import annotations

import networkx as nx

from wsnguard_core.netsim.metrics import MetricsReport
from wsnguard_core.netsim.topology import Network


def traffic_share(report: MetricsReport, mote_id: int) -> float:
    """Fraction of sent data packets the mote relayed."""
    sent = report.total("packets_sent")
    if sent == 0:
        return 0.0
    return report.mote_counter(mote_id, "packets_forwarded") / sent


def shortest_path_share(network: Network, mote_id: int, *, sources: list[int]) -> float:
    """Fraction of sources whose shortest path to the sink relays through the mote."""
    if not sources:
        return 0.0
    paths = nx.single_target_shortest_path(network.graph, network.sink_id)
    crossing = sum(1 for source in sources if mote_id in paths.get(source, [])[1:-1])
    return crossing / len(sources)


def honest_hop_distance(network: Network, a: int, b: int) -> int:
    return nx.shortest_path_length(network.graph, a, b)


def energy_increase(baseline: MetricsReport, attacked: MetricsReport) -> dict[int, int]:
    return {
        mote_id: attacked.energy_spent_uj.get(mote_id, 0) - spent
        for mote_id, spent in baseline.energy_spent_uj.items()
    }
