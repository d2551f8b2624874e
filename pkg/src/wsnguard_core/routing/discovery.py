"""On-demand route discovery on a simpy event loop.

Requests flood with duplicate suppression by (origin, request_id). AODV replies travel hop by
hop along reverse routes; DSR replies retrace the physical trail of the request they answer.
Every attacker that forwards a route-control packet gets to act on it first.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Generator, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import simpy

from wsnguard_core.adversary.actions import Action, Drop, Forward, Tunnel
from wsnguard_core.netsim.packets import WirePacket
from wsnguard_core.netsim.topology import Network
from wsnguard_core.schemas import BROADCAST_ID, PacketKind, Reliability, RoutingVariant

from .messages import (
    MAX_ROUTE_LENGTH,
    AodvReply,
    AodvRequest,
    DsrReply,
    DsrRequest,
    decode_route_message,
)
from .table import DEFAULT_ROUTE_LIFETIME_MS, RouteEntry, RoutingState, install_route

if TYPE_CHECKING:
    from wsnguard_core.adversary.behaviors import AdversaryRoster

logger = logging.getLogger(__name__)

DEFAULT_REQUEST_TIMEOUT_MS = 1_000.0
DEFAULT_HOP_LATENCY_MS = 5.0

TransmitHook = Callable[[int, Sequence[int], WirePacket], None]
AttackHook = Callable[[int, Action], None]


class Unreachable(ValueError):
    pass


@dataclass(slots=True)
class DiscoveryContext:
    state: RoutingState = field(default_factory=RoutingState)
    adversary: AdversaryRoster | None = None
    hop_latency_ms: float = DEFAULT_HOP_LATENCY_MS
    request_timeout_ms: float = DEFAULT_REQUEST_TIMEOUT_MS
    route_lifetime_ms: float = DEFAULT_ROUTE_LIFETIME_MS
    start_ms: float = 0.0
    on_transmit: TransmitHook | None = None
    on_attack: AttackHook | None = None


@dataclass(slots=True, frozen=True)
class RouteError:
    reporter: int
    unreachable_next: int


@dataclass(slots=True, frozen=True)
class SourceRouteResult:
    reached: tuple[int, ...]
    route_error: RouteError | None = None

    @property
    def delivered(self) -> bool:
        return self.route_error is None


def aodv_discover(
    network: Network,
    src: int,
    dst: int,
    *,
    context: DiscoveryContext | None = None,
) -> RouteEntry:
    return _Discovery(network, RoutingVariant.AODV, src, dst, context or DiscoveryContext()).run()


def dsr_discover(
    network: Network,
    src: int,
    dst: int,
    *,
    context: DiscoveryContext | None = None,
) -> RouteEntry:
    return _Discovery(network, RoutingVariant.DSR, src, dst, context or DiscoveryContext()).run()


def discover(
    network: Network,
    src: int,
    dst: int,
    *,
    variant: RoutingVariant,
    context: DiscoveryContext | None = None,
) -> RouteEntry:
    if variant == RoutingVariant.AODV:
        return aodv_discover(network, src, dst, context=context)
    if variant == RoutingVariant.DSR:
        return dsr_discover(network, src, dst, context=context)
    raise ValueError(f"{variant.value} routing has no discovery phase")


def forward_source_routed(network: Network, route: Sequence[int]) -> SourceRouteResult:
    """Walk a source route hop by hop; the first dead mote or missing link yields a route error."""
    if not route:
        raise ValueError("source route must not be empty")
    reached = [route[0]]
    for sender, receiver in zip(route, route[1:], strict=False):
        if not network.has_link(sender, receiver) or not network.mote(receiver).alive:
            return SourceRouteResult(
                reached=tuple(reached),
                route_error=RouteError(reporter=sender, unreachable_next=receiver),
            )
        reached.append(receiver)
    return SourceRouteResult(reached=tuple(reached))


class _Discovery:
    def __init__(
        self,
        network: Network,
        variant: RoutingVariant,
        origin: int,
        target: int,
        context: DiscoveryContext,
    ) -> None:
        self.network = network
        self.variant = variant
        self.origin = origin
        self.target = target
        self.context = context
        self.state = context.state
        self.env = simpy.Environment(initial_time=context.start_ms)
        self.request_id = self.state.next_request_id(origin)
        self.forwarded: set[int] = {origin}
        self.answered: set[int] = set()
        self.replies_at_origin = 0

    def run(self) -> RouteEntry:
        if self.origin == self.target:
            raise ValueError("route discovery needs distinct src and dst")
        if self.origin not in self.network.graph or not self._alive(self.origin):
            raise Unreachable(f"origin {self.origin} is not a live mote")

        if self.variant == RoutingVariant.AODV:
            known = self.state.table(self.origin).lookup(self.target)
            request = AodvRequest(
                origin=self.origin,
                target=self.target,
                request_id=self.request_id,
                origin_seq=self.state.bump_sequence(self.origin),
                dest_seq=known.dest_seq if known is not None else 0,
            )
        else:
            request = DsrRequest(
                origin=self.origin,
                target=self.target,
                request_id=self.request_id,
                route_record=(self.origin,),
            )

        self._broadcast(self.origin, request.encode(), trail=(self.origin,), forwarding=False)
        deadline = self.context.start_ms + self.context.request_timeout_ms
        self.env.run(until=deadline)

        entry = self.state.table(self.origin).lookup(self.target)
        if self.replies_at_origin == 0 or entry is None:
            logger.info(
                "route discovery failed variant=%s src=%d dst=%d",
                self.variant.value,
                self.origin,
                self.target,
            )
            raise Unreachable(f"no route from {self.origin} to {self.target}")
        logger.debug(
            "route discovered variant=%s src=%d dst=%d hops=%d",
            self.variant.value,
            self.origin,
            self.target,
            entry.hop_count,
        )
        return entry

    # transmission

    def _broadcast(
        self,
        sender: int,
        payload: bytes,
        *,
        trail: tuple[int, ...],
        forwarding: bool,
    ) -> None:
        packet = self._packet(sender, BROADCAST_ID, payload)
        packet = self._intercept(sender, packet, trail=trail, forwarding=forwarding)
        if packet is None or not self._alive(sender):
            return
        receivers = self.network.alive_neighbors(sender)
        self._charge(sender, receivers, packet)
        for receiver in receivers:
            self.env.process(self._arrive(receiver, sender, packet, trail))

    def _unicast(
        self,
        sender: int,
        receiver: int,
        payload: bytes,
        *,
        trail: tuple[int, ...],
        forwarding: bool,
        back_path: tuple[int, ...] = (),
        forward_path: tuple[int, ...] = (),
    ) -> None:
        packet = self._packet(sender, receiver, payload)
        packet = self._intercept(
            sender,
            packet,
            trail=trail,
            forwarding=forwarding,
            back_path=back_path,
            forward_path=forward_path,
        )
        if packet is None or not self._alive(sender):
            return
        if not self.network.has_link(sender, receiver) or not self._alive(receiver):
            self._charge(sender, [], packet)
            return
        self._charge(sender, [receiver], packet)
        arrival = self._arrive(
            receiver, sender, packet, trail, back_path=back_path, forward_path=forward_path
        )
        self.env.process(arrival)

    def _intercept(
        self,
        sender: int,
        packet: WirePacket,
        *,
        trail: tuple[int, ...],
        forwarding: bool,
        back_path: tuple[int, ...] = (),
        forward_path: tuple[int, ...] = (),
    ) -> WirePacket | None:
        adversary = self.context.adversary
        if not forwarding or adversary is None or sender not in adversary:
            return packet

        action = adversary.act(sender, packet, now_ms=self.env.now)
        if not isinstance(action, Forward) and self.context.on_attack is not None:
            self.context.on_attack(sender, action)
        if isinstance(action, Drop):
            return None
        if isinstance(action, Tunnel):
            self.env.process(
                self._tunnel(sender, action, trail, back_path=back_path, forward_path=forward_path)
            )
            return None
        return action.packet

    def _tunnel(
        self,
        entry: int,
        action: Tunnel,
        trail: tuple[int, ...],
        *,
        back_path: tuple[int, ...],
        forward_path: tuple[int, ...],
    ) -> Generator[simpy.Event, None, None]:
        yield self.env.timeout(action.latency_ms)
        peer = action.peer
        if not self._alive(peer):
            return
        message = decode_route_message(action.packet.payload)

        if isinstance(message, AodvRequest | DsrRequest):
            if peer in self.forwarded:
                return
            self.forwarded.add(peer)
            if isinstance(message, AodvRequest):
                self._offer_reverse_route(peer, entry, message, (*trail, peer))
            self._broadcast(peer, action.packet.payload, trail=(*trail, peer), forwarding=False)
            return

        if isinstance(message, AodvReply):
            reverse = self.state.table(peer).lookup(self.origin)
            if reverse is None:
                return
            self._unicast(
                peer,
                reverse.next_hop,
                action.packet.payload,
                trail=(*trail, peer),
                forwarding=False,
            )
            return

        if peer not in back_path:
            return
        position = back_path.index(peer)
        if position + 1 >= len(back_path):
            return
        self._unicast(
            peer,
            back_path[position + 1],
            action.packet.payload,
            trail=(*trail, peer),
            forwarding=False,
            back_path=back_path,
            forward_path=forward_path,
        )

    def _arrive(
        self,
        receiver: int,
        sender: int,
        packet: WirePacket,
        trail: tuple[int, ...],
        *,
        back_path: tuple[int, ...] = (),
        forward_path: tuple[int, ...] = (),
    ) -> Generator[simpy.Event, None, None]:
        yield self.env.timeout(self.context.hop_latency_ms)
        if not self._alive(receiver):
            return
        try:
            message = decode_route_message(packet.payload)
        except ValueError:
            logger.debug("undecodable route-control payload dropped at mote=%d", receiver)
            return

        if isinstance(message, AodvRequest):
            self._on_aodv_request(receiver, sender, message, trail)
        elif isinstance(message, AodvReply):
            self._on_aodv_reply(receiver, sender, message, trail)
        elif isinstance(message, DsrRequest):
            self._on_dsr_request(receiver, message, trail)
        else:
            self._on_dsr_reply(receiver, message, trail, back_path, forward_path)

    # aodv

    def _on_aodv_request(
        self,
        mote_id: int,
        sender: int,
        message: AodvRequest,
        trail: tuple[int, ...],
    ) -> None:
        if mote_id == self.origin or message.request_id != self.request_id:
            return
        here = (*trail, mote_id)
        seen = message.advanced()
        self._offer_reverse_route(mote_id, sender, seen, here)

        if self._answers(mote_id):
            if mote_id in self.answered:
                return
            self.answered.add(mote_id)
            reply = AodvReply(
                origin=self.origin,
                target=self.target,
                request_id=self.request_id,
                dest_seq=self._reply_seq(mote_id, seen.dest_seq),
                hop_count=0,
                lifetime_ms=int(self.context.route_lifetime_ms),
            )
            self._send_aodv_reply(mote_id, reply, trail=(mote_id,), forwarding=False)
            return

        cached = self.state.table(mote_id).lookup(self.target, now_ms=self.env.now)
        if (
            cached is not None
            and seen.dest_seq > 0
            and cached.dest_seq >= seen.dest_seq
            and mote_id not in self.answered
            and self.origin not in cached.physical_path
        ):
            self.answered.add(mote_id)
            reply = AodvReply(
                origin=self.origin,
                target=self.target,
                request_id=self.request_id,
                dest_seq=cached.dest_seq,
                hop_count=cached.hop_count,
                lifetime_ms=int(self.context.route_lifetime_ms),
            )
            self._send_aodv_reply(
                mote_id,
                reply,
                trail=tuple(reversed(cached.physical_path)),
                forwarding=False,
            )
            return

        if mote_id in self.forwarded:
            return
        self.forwarded.add(mote_id)
        self._broadcast(mote_id, seen.encode(), trail=here, forwarding=True)

    def _offer_reverse_route(
        self,
        mote_id: int,
        sender: int,
        request: AodvRequest,
        here: tuple[int, ...],
    ) -> None:
        candidate = RouteEntry(
            destination=self.origin,
            variant=RoutingVariant.AODV,
            next_hop=sender,
            hop_count=request.hop_count,
            dest_seq=request.origin_seq,
            lifetime_ms=self.context.route_lifetime_ms,
            installed_at_ms=self.env.now,
            physical_path=tuple(reversed(here)),
        )
        install_route(self.state.table(mote_id), candidate, now_ms=self.env.now)

    def _send_aodv_reply(
        self,
        mote_id: int,
        reply: AodvReply,
        *,
        trail: tuple[int, ...],
        forwarding: bool,
    ) -> None:
        reverse = self.state.table(mote_id).lookup(self.origin, now_ms=self.env.now)
        if reverse is None:
            return
        self._unicast(mote_id, reverse.next_hop, reply.encode(), trail=trail, forwarding=forwarding)

    def _on_aodv_reply(
        self,
        mote_id: int,
        sender: int,
        message: AodvReply,
        trail: tuple[int, ...],
    ) -> None:
        if message.request_id != self.request_id or mote_id in trail:
            return
        here = (*trail, mote_id)
        seen = message.advanced()
        candidate = RouteEntry(
            destination=self.target,
            variant=RoutingVariant.AODV,
            next_hop=sender,
            hop_count=seen.hop_count,
            dest_seq=seen.dest_seq,
            lifetime_ms=float(seen.lifetime_ms),
            installed_at_ms=self.env.now,
            physical_path=tuple(reversed(here)),
        )
        install_route(self.state.table(mote_id), candidate, now_ms=self.env.now)
        if mote_id == self.origin:
            self.replies_at_origin += 1
            return
        self._send_aodv_reply(mote_id, seen, trail=here, forwarding=True)

    # dsr

    def _on_dsr_request(self, mote_id: int, message: DsrRequest, trail: tuple[int, ...]) -> None:
        if (
            mote_id == self.origin
            or message.request_id != self.request_id
            or mote_id in message.route_record
        ):
            return
        here = (*trail, mote_id)
        seen = message.appended(mote_id)

        if self._answers(mote_id):
            route = seen.route_record
            if mote_id != self.target:
                route = (*route, self.target)
            if len(route) > MAX_ROUTE_LENGTH:
                return
            reply = DsrReply(
                origin=self.origin,
                target=self.target,
                request_id=self.request_id,
                route=route,
            )
            back_path = tuple(reversed(here))
            self._unicast(
                mote_id,
                back_path[1],
                reply.encode(),
                trail=(mote_id,),
                forwarding=False,
                back_path=back_path,
                forward_path=here,
            )
            return

        if mote_id in self.forwarded or len(seen.route_record) >= MAX_ROUTE_LENGTH:
            return
        self.forwarded.add(mote_id)
        self._broadcast(mote_id, seen.encode(), trail=here, forwarding=True)

    def _on_dsr_reply(
        self,
        mote_id: int,
        message: DsrReply,
        trail: tuple[int, ...],
        back_path: tuple[int, ...],
        forward_path: tuple[int, ...],
    ) -> None:
        if message.request_id != self.request_id or mote_id not in back_path:
            return
        here = (*trail, mote_id)
        if mote_id == self.origin:
            route = message.route
            candidate = RouteEntry(
                destination=self.target,
                variant=RoutingVariant.DSR,
                next_hop=route[1] if len(route) > 1 else route[0],
                hop_count=len(route) - 1,
                source_route=route,
                lifetime_ms=self.context.route_lifetime_ms,
                installed_at_ms=self.env.now,
                physical_path=forward_path,
            )
            install_route(self.state.table(mote_id), candidate, now_ms=self.env.now)
            self.replies_at_origin += 1
            return

        position = back_path.index(mote_id)
        if position + 1 >= len(back_path):
            return
        self._unicast(
            mote_id,
            back_path[position + 1],
            message.encode(),
            trail=here,
            forwarding=True,
            back_path=back_path,
            forward_path=forward_path,
        )

    # helpers

    def _answers(self, mote_id: int) -> bool:
        if mote_id == self.target:
            return True
        adversary = self.context.adversary
        if adversary is None:
            return False
        claimed = self.network.identities.get(mote_id, ())
        return adversary.answers_for(mote_id, self.target, claimed=claimed)

    def _reply_seq(self, mote_id: int, requested: int) -> int:
        if mote_id != self.target and self.context.adversary is not None:
            return self.context.adversary.forged_reply_seq(mote_id, requested)
        seq = max(self.state.sequence_of(mote_id), requested, 1)
        self.state.sequence_numbers[mote_id] = seq
        return seq

    def _packet(self, sender: int, receiver: int, payload: bytes) -> WirePacket:
        return WirePacket(
            src=sender,
            dst=receiver,
            kind=PacketKind.ROUTE_CTL,
            reliability=Reliability.UNRELIABLE,
            payload=payload,
        )

    def _charge(self, sender: int, receivers: Sequence[int], packet: WirePacket) -> None:
        if self.context.on_transmit is not None:
            self.context.on_transmit(sender, receivers, packet)

    def _alive(self, mote_id: int) -> bool:
        return self.network.mote(mote_id).alive
