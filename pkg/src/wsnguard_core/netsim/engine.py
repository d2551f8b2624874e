"""The discrete-event run loop.

A run replays the scenario's traffic script over one simpy environment: SNEP-protected data
along the configured routing variant, authenticated broadcasts flooded from the sink with
delayed key disclosure, hello floods, and the sink's integrity probes. Attackers act on every
packet they relay. Everything that goes wrong becomes a counter in the report.
"""

from __future__ import annotations

import copy
import logging
import math
import random
import struct
from collections import defaultdict
from collections.abc import Callable, Generator, Sequence
from dataclasses import dataclass

import simpy

from wsnguard_core.adversary.actions import (
    Action,
    Drop,
    Forward,
    Modify,
    Tunnel,
    outgoing_packet,
)
from wsnguard_core.adversary.behaviors import AdversaryRoster, AttackerConfig
from wsnguard_core.adversary.identities import decode_hello, hello_flood, sybil_identities
from wsnguard_core.config import Scenario, TrafficEntry, TrafficKind
from wsnguard_core.crypto.primitives import Key, derive_key
from wsnguard_core.detection.probes import (
    ProbeInjection,
    SinkProbeMonitor,
    probe_plan_from_config,
    schedule_probes,
)
from wsnguard_core.mutesla.chain import (
    ChainExpired,
    KeyChain,
    decode_broadcast,
    decode_disclosure,
    encode_broadcast,
    encode_disclosure,
    generate_chain,
    mt_broadcast,
    mt_disclose,
)
from wsnguard_core.mutesla.receiver import (
    BadChainKey,
    ReceiverState,
    mt_on_disclosure,
    mt_receive,
    purge_unverifiable,
)
from wsnguard_core.routing.discovery import (
    DiscoveryContext,
    Unreachable,
    discover,
    forward_source_routed,
)
from wsnguard_core.routing.table import RouteEntry, RoutingState
from wsnguard_core.schemas import (
    BROADCAST_ID,
    AttackerKind,
    MoteRole,
    PacketKind,
    ProtectionMode,
    Reliability,
    RoutingVariant,
)
from wsnguard_core.snep.channel import (
    MacMismatch,
    SecuredPayload,
    SnepChannel,
    StaleCounter,
    open_channel_pair,
    snep_receive_window,
    snep_send,
)

from .beacon import BeaconRoutes, beacon_tree_route
from .energy import (
    CryptoOp,
    Direction,
    EnergyLedger,
    charge_crypto,
    charge_idle,
    charge_processing,
    charge_radio,
    uj_to_mj,
)
from .metrics import (
    GLOBAL_SCOPE,
    FlowStats,
    MetricsCollector,
    MetricsReport,
    attacker_scope,
    mote_scope,
)
from .packets import WirePacket
from .reliable import LossScript, ReliabilityPolicy, transmit_hop
from .topology import Network, build_topology, neighbor_table

logger = logging.getLogger(__name__)

BASE_COUNTERS = (
    "altered_accepted",
    "altered_rejected",
    "packets_delivered",
    "packets_dropped",
    "packets_sent",
)
SYM_BLOCK_BYTES = 16

_READING = struct.Struct(">HHI")
_ATTACK_METRICS: dict[type, str] = {
    Drop: "attack_drops",
    Modify: "attack_modifications",
    Tunnel: "attack_tunnels",
}

FloodHandler = Callable[[int, WirePacket], None]


@dataclass(slots=True)
class _Flow:
    sent: int = 0
    delivered: int = 0
    dropped: int = 0


@dataclass(slots=True)
class _Transit:
    """One data packet on its way from source to destination."""

    flow: str
    src: int
    dst: int
    plaintext: bytes
    packet: WirePacket
    source_route: tuple[int, ...] = ()
    pinned: bool = False
    via_tunnel: int | None = None
    altered: bool = False


class Simulation:
    def __init__(self, network: Network, scenario: Scenario, *, seed: int) -> None:
        self.network = network
        self.scenario = scenario
        self.seed = seed
        self.protocols = scenario.protocols
        self.model = scenario.energy_model
        self.sink = network.sink_id
        self.env = simpy.Environment()
        self.rng = random.Random(seed)
        self.ledger = EnergyLedger()
        self.metrics = MetricsCollector(bin_ms=scenario.metrics_bin_ms)
        self.losses = LossScript.from_rules(scenario.losses)
        self.policy = ReliabilityPolicy(
            max_retries=self.protocols.reliability.max_retries,
            ack_timeout_ms=self.protocols.reliability.ack_timeout_ms,
        )
        self.roster = AdversaryRoster.from_configs(scenario.attackers, seed=seed)
        self.master_key = Key.random(self.rng)
        self.routing_state = RoutingState()
        self.heard_from: defaultdict[int, set[int]] = defaultdict(set)
        self.unreachable: set[int] = set()
        self.monitor: SinkProbeMonitor | None = None

        self._flows: dict[str, _Flow] = {}
        self._channels: dict[tuple[int, int], tuple[SnepChannel, SnepChannel]] = {}
        self._beacon_cache: dict[int, tuple[frozenset[int], BeaconRoutes]] = {}
        self._chain: KeyChain | None = None
        self._receivers: dict[int, ReceiverState] = {}
        self._issued_broadcasts: defaultdict[int, list[bytes]] = defaultdict(list)
        self._scheduled_disclosures: set[int] = set()

        self._prepare_motes()

    # setup

    def _prepare_motes(self) -> None:
        eps = self.protocols.mutesla.max_clock_error_ms
        for mote in self.network.motes():
            # the sink is the time reference
            mote.clock_offset_ms = 0.0 if mote.id == self.sink else self.rng.uniform(-eps, eps)
        for mote_id in self.roster.mote_ids:
            self.network.mote(mote_id).role = MoteRole.ATTACKER
        for config in self.roster.of_kind(AttackerKind.SYBIL):
            claimed = sybil_identities(config, network=self.network)
            self.network.claim_identities(config.mote_id, claimed)
            logger.info("sybil identities mote=%d claimed=%s", config.mote_id, claimed)

    def _start_broadcast_auth(self) -> None:
        settings = self.protocols.mutesla
        if not settings.enabled:
            return
        if settings.chain_seed_hex is not None:
            chain_seed = Key.from_hex(settings.chain_seed_hex)
        else:
            chain_seed = derive_key(self.master_key, b"mutesla-chain")
        self._chain = generate_chain(
            chain_seed,
            settings.chain_length,
            interval_len=settings.interval_ms,
            d=settings.disclosure_delay,
            start_time=0.0,
        )
        for mote_id in self.network.mote_ids:
            if mote_id == self.sink:
                continue
            self._receivers[mote_id] = ReceiverState(
                commitment_key=self._chain.commitment,
                max_clock_error_eps=settings.max_clock_error_ms,
            )

    def _start_probes(self) -> None:
        settings = self.scenario.detection
        if not settings.enabled:
            return
        if settings.probe_key_hex is not None:
            probe_key = Key.from_hex(settings.probe_key_hex)
        else:
            probe_key = derive_key(self.master_key, b"probe")
        plan = probe_plan_from_config(
            settings,
            sink=self.sink,
            routes=self._beacon_routes(self.sink),
            probe_key=probe_key,
        )
        self.monitor = SinkProbeMonitor(
            plan=plan,
            hop_latency_ms=self.scenario.hop_latency_ms,
            slack_ms=settings.slack_ms,
        )
        injections = schedule_probes(plan, self.scenario.duration_ms)
        logger.info(
            "probes scheduled paths=%d injections=%d", len(plan.probe_paths), len(injections)
        )
        for injection in injections:
            self.env.process(self._probe(injection))

    # run

    def run(self) -> MetricsReport:
        logger.info(
            "run start seed=%d motes=%d traffic=%d attackers=%d routing=%s",
            self.seed,
            len(self.network.mote_ids),
            len(self.scenario.traffic),
            len(self.roster.mote_ids),
            self.protocols.routing.value,
        )
        if self.protocols.routing == RoutingVariant.BEACON_TREE:
            self.unreachable.update(self._beacon_routes(self.sink).unreachable)

        self._start_broadcast_auth()
        self._start_probes()
        for config in self.roster.of_kind(AttackerKind.HELLO_FLOOD):
            self.env.process(self._hello_flood(config))
        for index, entry in enumerate(self.scenario.traffic):
            self.env.process(self._traffic(index, entry))

        # new activity stops at duration_ms; in-flight packets, disclosures and probe
        # deadlines drain afterwards
        self.env.run()
        report = self._report(end_ms=max(self.scenario.duration_ms, self.env.now))
        logger.info(
            "run done seed=%d end_ms=%d sent=%d delivered=%d dropped=%d",
            self.seed,
            report.end_time_ms,
            report.total("packets_sent"),
            report.total("packets_delivered"),
            report.total("packets_dropped"),
        )
        return report

    # traffic

    def _traffic(self, index: int, entry: TrafficEntry) -> Generator[simpy.Event, None, None]:
        for repeat in range(entry.repeat):
            at_ms = entry.at_ms + repeat * entry.interval_ms
            if at_ms >= self.scenario.duration_ms:
                return
            if at_ms > self.env.now:
                yield self.env.timeout(at_ms - self.env.now)
            payload = self._reading(index, repeat, entry)
            if entry.kind == TrafficKind.BROADCAST:
                self._broadcast(payload)
            else:
                self.env.process(self._send(entry, payload))

    def _reading(self, index: int, repeat: int, entry: TrafficEntry) -> bytes:
        if entry.payload_hex is not None:
            return bytes.fromhex(entry.payload_hex)
        stamp = _READING.pack(entry.src, index & 0xFFFF, repeat & 0xFFFFFFFF)
        copies = math.ceil(entry.size_bytes / len(stamp)) if entry.size_bytes else 0
        return (stamp * copies)[: entry.size_bytes]

    def _send(self, entry: TrafficEntry, plaintext: bytes) -> Generator[simpy.Event, None, None]:
        src = entry.src
        dst = self.scenario.destination_of(entry)
        flow_name = f"{src}->{dst}"
        flow = self._flows.setdefault(flow_name, _Flow())
        flow.sent += 1
        self._bump("packets_sent")
        self._bump("packets_sent", scope=mote_scope(src))

        transit = _Transit(
            flow=flow_name,
            src=src,
            dst=dst,
            plaintext=plaintext,
            packet=WirePacket(
                src=src, dst=dst, kind=PacketKind.DATA, reliability=entry.reliability
            ),
        )
        if not self.network.mote(src).alive:
            self._drop(transit, src, "source_dead")
            return

        sender_channel, _ = self._channel(src, dst)
        secured = snep_send(sender_channel, plaintext)
        self._charge_snep(src, len(plaintext))
        transit.packet = transit.packet.with_payload(secured.to_wire())

        variant = self.protocols.routing
        if variant != RoutingVariant.BEACON_TREE:
            entry_route = self._resolve_route(src, dst, variant=variant)
            if entry_route is None:
                self._drop(transit, src, "unreachable")
                return
            wait = entry_route.installed_at_ms - self.env.now
            if wait > 0:
                yield self.env.timeout(wait)
            if variant == RoutingVariant.DSR:
                transit.source_route = entry_route.source_route

        yield from self._walk(transit)

    def _resolve_route(self, src: int, dst: int, *, variant: RoutingVariant) -> RouteEntry | None:
        cached = self.routing_state.table(src).lookup(dst, now_ms=self.env.now)
        if cached is not None:
            return cached
        self._bump("route_discoveries")
        context = DiscoveryContext(
            state=self.routing_state,
            adversary=self.roster,
            hop_latency_ms=self.scenario.hop_latency_ms,
            request_timeout_ms=self.protocols.request_timeout_ms,
            route_lifetime_ms=self.protocols.route_lifetime_ms,
            start_ms=self.env.now,
            on_transmit=self._on_route_transmit,
            on_attack=self._record_attack,
        )
        try:
            return discover(self.network, src, dst, variant=variant, context=context)
        except Unreachable:
            self._bump("route_unreachable")
            self.unreachable.add(src)
            return None

    def _walk(self, transit: _Transit) -> Generator[simpy.Event, None, None]:
        current = transit.src
        while current != transit.dst:
            action: Action = Forward(transit.packet)
            if current != transit.src:
                self._bump("packets_forwarded", scope=mote_scope(current))
                action = self._act(current, transit.packet, via_tunnel=transit.via_tunnel)
                if isinstance(action, Drop):
                    self._drop(transit, current, action.reason)
                    return
                if isinstance(action, Modify):
                    transit.packet = action.packet
                    transit.altered = True
                if self._behavior(current) == AttackerKind.SINKHOLE:
                    # attracted traffic continues along the honest tree
                    transit.pinned = True

            hopped = transit.packet.hop()
            if hopped is None:
                self._drop(transit, current, "ttl_expired")
                return
            if isinstance(action, Tunnel):
                yield self.env.timeout(action.latency_ms)
                transit.packet = hopped
                transit.via_tunnel = current
                current = action.peer
                continue

            following = self._next_hop(current, transit)
            if following is None:
                self._drop(transit, current, "no_route")
                return
            if not self.network.has_link(current, following):
                if self._tunnel_peer(current) != following:
                    self._route_error(transit, current)
                    return
                yield self.env.timeout(self._tunnel_latency(current))
                transit.packet = hopped
                transit.via_tunnel = current
                current = following
                continue

            outcome = transmit_hop(
                self.network.mote(current),
                transit.packet,
                receiver=self.network.mote(following),
                model=self.model,
                ledger=self.ledger,
                losses=self.losses,
                policy=self.policy,
                hop_latency_ms=self.scenario.hop_latency_ms,
            )
            self._bump("transmissions", amount=outcome.transmissions)
            if outcome.transmissions > 1:
                self._bump("retransmissions", amount=outcome.transmissions - 1)
            if outcome.elapsed_ms:
                yield self.env.timeout(outcome.elapsed_ms)
            if not outcome.delivered:
                self._hop_failed(transit, current, following)
                return
            transit.packet = hopped
            transit.via_tunnel = None
            current = following

        self._accept(transit)

    def _next_hop(self, mote_id: int, transit: _Transit) -> int | None:
        variant = self.protocols.routing
        if variant == RoutingVariant.DSR:
            route = transit.source_route
            if mote_id not in route:
                return None
            position = route.index(mote_id)
            return route[position + 1] if position + 1 < len(route) else None
        if variant == RoutingVariant.AODV:
            entry = self.routing_state.table(mote_id).lookup(transit.dst, now_ms=self.env.now)
            return entry.next_hop if entry is not None else None

        routes = self._beacon_routes(transit.dst)
        table = routes.honest_next_hop if transit.pinned else routes.next_hop
        return table.get(mote_id)

    def _accept(self, transit: _Transit) -> None:
        _, receiver_channel = self._channel(transit.src, transit.dst)
        mode = self.protocols.protection_mode
        self._charge_snep(transit.dst, len(transit.plaintext))
        try:
            secured = SecuredPayload.from_wire(transit.packet.payload, protection_mode=mode)
            plaintext, counter = snep_receive_window(
                receiver_channel, secured, window=self.protocols.snep.receive_window
            )
        except StaleCounter:
            self._bump("stale_rejected")
            self._drop(transit, transit.dst, "stale")
            return
        except MacMismatch:
            self._bump("altered_rejected" if transit.altered else "mac_rejected")
            self._drop(transit, transit.dst, "rejected")
            return

        if mode != ProtectionMode.NONE and counter < receiver_channel.counter_recv - 1:
            self._bump("reordered_accepted")
        flow = self._flows[transit.flow]
        flow.delivered += 1
        self._bump("packets_delivered")
        self._bump("packets_received", scope=mote_scope(transit.dst))
        if plaintext != transit.plaintext:
            self._bump("altered_accepted")
            logger.debug("altered packet accepted flow=%s", transit.flow)

    def _drop(self, transit: _Transit, mote_id: int, reason: str) -> None:
        self._flows[transit.flow].dropped += 1
        self._bump("packets_dropped")
        self._bump(f"dropped_{reason}")
        logger.debug("packet dropped flow=%s mote=%d reason=%s", transit.flow, mote_id, reason)

    def _hop_failed(self, transit: _Transit, current: int, following: int) -> None:
        variant = self.protocols.routing
        if variant == RoutingVariant.DSR:
            broken = forward_source_routed(self.network, (current, following)).route_error
            if broken is not None:
                self._route_error(transit, broken.reporter)
                return
        elif variant == RoutingVariant.AODV and not self.network.mote(following).alive:
            self._route_error(transit, current)
            return
        self._drop(transit, current, "link_failure")

    def _route_error(self, transit: _Transit, reporter: int) -> None:
        self._bump("route_errors")
        self.routing_state.table(transit.src).remove(transit.dst)
        self._drop(transit, reporter, "route_error")

    # authenticated broadcast

    def _broadcast(self, message: bytes) -> None:
        chain = self._chain
        if chain is None:
            return
        try:
            packet = mt_broadcast(chain, message, self.env.now)
        except ChainExpired:
            self._bump("broadcast_chain_expired")
            return
        sink = self.network.mote(self.sink)
        charge_crypto(sink, CryptoOp.MAC, model=self.model, ledger=self.ledger)
        self._issued_broadcasts[packet.interval_index].append(packet.message)
        self._bump("broadcasts_sent")
        if packet.interval_index not in self._scheduled_disclosures:
            self._scheduled_disclosures.add(packet.interval_index)
            self.env.process(self._disclose(packet.interval_index))
        wire = WirePacket(
            src=self.sink,
            dst=BROADCAST_ID,
            kind=PacketKind.BEACON,
            reliability=Reliability.UNRELIABLE,
            payload=encode_broadcast(packet),
        )
        self._flood(self.sink, wire, self._on_broadcast)

    def _disclose(self, interval_index: int) -> Generator[simpy.Event, None, None]:
        chain = self._chain
        if chain is None:
            return
        at_ms = chain.params.disclosure_time(interval_index)
        if at_ms > self.env.now:
            yield self.env.timeout(at_ms - self.env.now)
        disclosed = mt_disclose(chain, self.env.now)
        if disclosed is None:
            return
        self._bump("disclosures_sent")
        wire = WirePacket(
            src=self.sink,
            dst=BROADCAST_ID,
            kind=PacketKind.KEY_DISCLOSURE,
            reliability=Reliability.UNRELIABLE,
            payload=encode_disclosure(disclosed),
        )
        self._flood(self.sink, wire, self._on_disclosure)

    def _on_broadcast(self, mote_id: int, wire: WirePacket) -> None:
        state = self._receivers.get(mote_id)
        chain = self._chain
        if state is None or chain is None:
            return
        try:
            packet = decode_broadcast(wire.payload)
        except ValueError:
            self._bump("broadcast_malformed")
            return
        local_ms = self.env.now + self.network.mote(mote_id).clock_offset_ms
        outcome = mt_receive(state, packet, chain.params, local_ms)
        if outcome.buffered:
            self._bump("broadcast_buffered")
            return
        self._bump("broadcast_discarded")
        if outcome.reason is not None:
            self._bump(f"broadcast_discarded_{outcome.reason.value}")

    def _on_disclosure(self, mote_id: int, wire: WirePacket) -> None:
        state = self._receivers.get(mote_id)
        if state is None:
            return
        mote = self.network.mote(mote_id)
        try:
            disclosed = decode_disclosure(wire.payload)
        except ValueError:
            self._bump("disclosure_rejected")
            return
        rejected_before = state.rejected_count
        try:
            messages = mt_on_disclosure(state, disclosed.key, disclosed.interval_index)
        except BadChainKey:
            self._bump("disclosure_rejected")
            return
        rejected = state.rejected_count - rejected_before
        for _ in range(len(messages) + rejected):
            charge_crypto(mote, CryptoOp.MAC, model=self.model, ledger=self.ledger)

        genuine = self._issued_broadcasts.get(disclosed.interval_index, [])
        for message in messages:
            self._bump("broadcast_authenticated")
            self._bump("broadcast_authenticated", scope=mote_scope(mote_id))
            if message not in genuine:
                self._bump("altered_accepted")
        if rejected:
            self._bump("broadcast_rejected", amount=rejected)
            self._bump("altered_rejected", amount=rejected)

    # flooding

    def _flood(self, origin: int, packet: WirePacket, handler: FloodHandler) -> None:
        self._emit(origin, packet, seen={origin}, handler=handler, relay=False)

    def _emit(
        self,
        sender: int,
        packet: WirePacket,
        *,
        seen: set[int],
        handler: FloodHandler,
        relay: bool,
        via_tunnel: int | None = None,
    ) -> None:
        mote = self.network.mote(sender)
        if not mote.alive:
            return
        if relay:
            action = self._act(sender, packet, via_tunnel=via_tunnel)
            if isinstance(action, Tunnel):
                self.env.process(self._flood_tunnel(sender, action, seen=seen, handler=handler))
                return
            outgoing = outgoing_packet(action)
            if outgoing is None:
                return
            packet = outgoing

        receivers = self.network.alive_neighbors(sender)
        if not receivers:
            return
        charge_radio(mote, packet.on_air_bits, Direction.TX, model=self.model, ledger=self.ledger)
        self._bump("transmissions")
        for receiver_id in receivers:
            if not self.losses.delivers(sender, receiver_id):
                continue
            receiver = self.network.mote(receiver_id)
            charge_radio(
                receiver, packet.on_air_bits, Direction.RX, model=self.model, ledger=self.ledger
            )
            self.env.process(self._flood_arrive(receiver_id, packet, seen=seen, handler=handler))

    def _flood_arrive(
        self,
        receiver: int,
        packet: WirePacket,
        *,
        seen: set[int],
        handler: FloodHandler,
    ) -> Generator[simpy.Event, None, None]:
        yield self.env.timeout(self.scenario.hop_latency_ms)
        if receiver in seen or not self.network.mote(receiver).alive:
            return
        seen.add(receiver)
        handler(receiver, packet)
        hopped = packet.hop()
        if hopped is not None:
            self._emit(receiver, hopped, seen=seen, handler=handler, relay=True)

    def _flood_tunnel(
        self,
        entry: int,
        action: Tunnel,
        *,
        seen: set[int],
        handler: FloodHandler,
    ) -> Generator[simpy.Event, None, None]:
        yield self.env.timeout(action.latency_ms)
        peer = action.peer
        if peer in seen or not self.network.mote(peer).alive:
            return
        seen.add(peer)
        handler(peer, action.packet)
        self._emit(peer, action.packet, seen=seen, handler=handler, relay=True, via_tunnel=entry)

    # hello flood

    def _hello_flood(self, attacker: AttackerConfig) -> Generator[simpy.Event, None, None]:
        scope = attacker_scope(attacker.mote_id)
        while self.env.now < self.scenario.duration_ms:
            for packet in hello_flood(attacker, self.env.now, network=self.network):
                receiver = self.network.mote(packet.dst)
                charge_radio(
                    receiver, packet.on_air_bits, Direction.RX, model=self.model, ledger=self.ledger
                )
                charge_processing(
                    receiver,
                    self.model.hello_processing_instr,
                    model=self.model,
                    ledger=self.ledger,
                )
                identity, _ = decode_hello(packet.payload)
                self.heard_from[packet.dst].add(identity)
                self._bump("hellos_received")
                self._bump("hellos_received", scope=mote_scope(packet.dst))
                self._bump("hellos_emitted", scope=scope)
            yield self.env.timeout(attacker.flood_period_ms)

    # probes

    def _probe(self, injection: ProbeInjection) -> Generator[simpy.Event, None, None]:
        monitor = self.monitor
        if monitor is None:
            return
        if injection.time_ms > self.env.now:
            yield self.env.timeout(injection.time_ms - self.env.now)
        sink = self.network.mote(self.sink)
        path = monitor.plan.probe_paths[injection.path_index]
        deadline = monitor.issue(injection)
        self.env.process(self._probe_deadline(deadline))
        charge_crypto(sink, CryptoOp.MAC, model=self.model, ledger=self.ledger)
        self._bump("probes_sent")

        packet = WirePacket(
            src=self.sink,
            dst=self.sink,
            kind=PacketKind.PROBE,
            reliability=Reliability.UNRELIABLE,
            payload=injection.encode(),
        )
        position = 0
        via_tunnel: int | None = None
        # a mote rewrites a probe at most once, or a second bit flip on the return leg
        # would restore it
        tampered: set[int] = set()
        while position < len(path) - 1:
            current = path[position]
            if position > 0 and current not in tampered:
                action = self._act(current, packet, via_tunnel=via_tunnel)
                if isinstance(action, Drop):
                    return
                if isinstance(action, Tunnel):
                    later = [
                        index
                        for index in range(position + 1, len(path))
                        if path[index] == action.peer
                    ]
                    if not later:
                        return
                    yield self.env.timeout(action.latency_ms)
                    position = later[0]
                    via_tunnel = current
                    continue
                if isinstance(action, Modify):
                    tampered.add(current)
                packet = action.packet

            following = path[position + 1]
            if not self.network.has_link(current, following):
                if self._tunnel_peer(current) != following:
                    return
                yield self.env.timeout(self._tunnel_latency(current))
                position += 1
                via_tunnel = current
                continue
            hopped = packet.hop()
            if hopped is None:
                return
            outcome = transmit_hop(
                self.network.mote(current),
                packet,
                receiver=self.network.mote(following),
                model=self.model,
                ledger=self.ledger,
                losses=self.losses,
                policy=self.policy,
                hop_latency_ms=self.scenario.hop_latency_ms,
            )
            self._bump("transmissions", amount=outcome.transmissions)
            if outcome.elapsed_ms:
                yield self.env.timeout(outcome.elapsed_ms)
            if not outcome.delivered:
                return
            packet = hopped
            position += 1
            via_tunnel = None

        if not sink.alive:
            return
        charge_crypto(sink, CryptoOp.MAC, model=self.model, ledger=self.ledger)
        result = monitor.on_return(packet.payload, now_ms=self.env.now)
        if result is not None:
            self._bump(f"probes_{result.verdict.value}")

    def _probe_deadline(self, deadline_ms: float) -> Generator[simpy.Event, None, None]:
        if deadline_ms > self.env.now:
            yield self.env.timeout(deadline_ms - self.env.now)
        if self.monitor is not None:
            for _ in self.monitor.expire(now_ms=self.env.now):
                self._bump("probes_missing")

    # shared helpers

    def _act(self, mote_id: int, packet: WirePacket, *, via_tunnel: int | None) -> Action:
        if mote_id not in self.roster:
            return Forward(packet)
        action = self.roster.act(mote_id, packet, now_ms=self.env.now)
        # the far end of a tunnel does not send the packet straight back
        if isinstance(action, Tunnel) and action.peer == via_tunnel:
            return Forward(packet)
        self._record_attack(mote_id, action)
        return action

    def _record_attack(self, mote_id: int, action: Action) -> None:
        metric = _ATTACK_METRICS.get(type(action))
        if metric is not None:
            self._bump(metric, scope=attacker_scope(mote_id))

    def _on_route_transmit(
        self, sender: int, receivers: Sequence[int], packet: WirePacket
    ) -> None:
        mote = self.network.mote(sender)
        charge_radio(mote, packet.on_air_bits, Direction.TX, model=self.model, ledger=self.ledger)
        for receiver_id in receivers:
            receiver = self.network.mote(receiver_id)
            charge_radio(
                receiver, packet.on_air_bits, Direction.RX, model=self.model, ledger=self.ledger
            )
        self._bump("route_ctl_sent")
        self._bump("route_ctl_sent", scope=mote_scope(sender))

    def _behavior(self, mote_id: int) -> AttackerKind | None:
        config = self.roster.attackers.get(mote_id)
        return config.behavior if config is not None else None

    def _tunnel_peer(self, mote_id: int) -> int | None:
        if self._behavior(mote_id) != AttackerKind.WORMHOLE:
            return None
        return self.roster.attackers[mote_id].peer

    def _tunnel_latency(self, mote_id: int) -> float:
        return self.roster.attackers[mote_id].tunnel_latency_ms

    def _beacon_routes(self, root: int) -> BeaconRoutes:
        dead = frozenset(mote.id for mote in self.network.motes() if not mote.alive)
        cached = self._beacon_cache.get(root)
        if cached is not None and cached[0] == dead:
            return cached[1]
        advertised: dict[int, int] = {}
        if root == self.sink:
            advertised = {
                mote_id: hops
                for mote_id, hops in self.roster.advertised_hops().items()
                if mote_id not in dead
            }
        routes = beacon_tree_route(
            self.network, root, advertised=advertised, tunnels=self.roster.tunnels()
        )
        self._beacon_cache[root] = (dead, routes)
        return routes

    def _channel(self, src: int, dst: int) -> tuple[SnepChannel, SnepChannel]:
        pair = self._channels.get((src, dst))
        if pair is None:
            low, high = sorted((src, dst))
            pair_key = derive_key(self.master_key, f"pair:{low}:{high}".encode())
            pair = open_channel_pair(
                mote_a=src,
                mote_b=dst,
                master_key=pair_key,
                protection_mode=self.protocols.protection_mode,
            )
            self._channels[(src, dst)] = pair
        return pair

    def _charge_snep(self, mote_id: int, length: int) -> None:
        mode = self.protocols.protection_mode
        if mode == ProtectionMode.NONE:
            return
        mote = self.network.mote(mote_id)
        if mode == ProtectionMode.AUTH_ENC:
            for _ in range(max(1, math.ceil(length / SYM_BLOCK_BYTES))):
                charge_crypto(mote, CryptoOp.SYM_BLOCK, model=self.model, ledger=self.ledger)
        charge_crypto(mote, CryptoOp.MAC, model=self.model, ledger=self.ledger)

    def _bump(self, metric: str, *, scope: str = GLOBAL_SCOPE, amount: int = 1) -> None:
        self.metrics.bump(metric, time_ms=self.env.now, scope=scope, amount=amount)

    # report

    def _report(self, *, end_ms: float) -> MetricsReport:
        for mote in self.network.motes():
            if mote.alive:
                charge_idle(mote, end_ms, model=self.model, ledger=self.ledger)

        for mote_id in sorted(self._receivers):
            state = self._receivers[mote_id]
            purged = purge_unverifiable(state)
            if purged:
                self.metrics.bump("broadcast_purged", time_ms=end_ms, amount=purged)
            if state.buffer:
                self.metrics.bump("broadcast_pending", time_ms=end_ms, amount=len(state.buffer))

        neighbor_sizes: dict[int, int] = {}
        for mote_id in self.network.mote_ids:
            table = neighbor_table(self.network, mote_id, heard_from=self.heard_from[mote_id])
            neighbor_sizes[mote_id] = len(table)
            self.metrics.gauge(
                "neighbor_table_size", float(len(table)), time_ms=end_ms, scope=mote_scope(mote_id)
            )

        spent = {mote_id: self.ledger.spent_uj(mote_id) for mote_id in self.network.mote_ids}
        for mote_id, amount in spent.items():
            self.metrics.gauge(
                "energy_spent_mj", uj_to_mj(amount), time_ms=end_ms, scope=mote_scope(mote_id)
            )

        totals = dict.fromkeys(BASE_COUNTERS, 0)
        totals.update(self.metrics.totals_for(GLOBAL_SCOPE))
        monitor = self.monitor
        detection = None
        events: tuple[dict[str, object], ...] = ()
        if monitor is not None:
            report = monitor.report(min_altered=self.scenario.detection.min_altered)
            detection = report.model_dump(mode="json")
            events = tuple(outcome.as_row() for outcome in monitor.outcomes)

        return MetricsReport(
            seed=self.seed,
            end_time_ms=int(round(end_ms)),
            totals=dict(sorted(totals.items())),
            flows={
                name: FlowStats(sent=flow.sent, delivered=flow.delivered, dropped=flow.dropped)
                for name, flow in sorted(self._flows.items())
            },
            energy_spent_uj=spent,
            energy_remaining_uj={mote.id: mote.energy_uj for mote in self.network.motes()},
            energy_by_category={
                mote_id: self.ledger.by_category(mote_id) for mote_id in self.network.mote_ids
            },
            dead_motes=tuple(mote.id for mote in self.network.motes() if not mote.alive),
            per_mote={
                int(scope.split(":")[1]): self.metrics.totals_for(scope)
                for scope in self.metrics.scopes("mote:")
            },
            per_attacker={
                int(scope.split(":")[1]): self.metrics.totals_for(scope)
                for scope in self.metrics.scopes("attacker:")
            },
            neighbor_table_size=neighbor_sizes,
            unreachable=tuple(sorted(self.unreachable)),
            rows=tuple(self.metrics.rows()),
            detection=detection,
            detection_events=events,
        )


def run(network: Network, scenario: Scenario, seed: int | None = None) -> MetricsReport:
    """Simulate `scenario` over a private copy of `network`.

    The report is a pure function of the three arguments; the caller's network is not mutated.
    """
    run_seed = scenario.seed if seed is None else seed
    return Simulation(copy.deepcopy(network), scenario, seed=run_seed).run()


def simulate_scenario(scenario: Scenario, *, seed: int | None = None) -> MetricsReport:
    run_seed = scenario.seed if seed is None else seed
    network = build_topology(scenario.topology, seed=run_seed)
    return run(network, scenario, run_seed)
