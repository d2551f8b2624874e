"""On-demand routing cores: AODV-style sequence numbers and DSR-style source routes."""

from .discovery import (
    DEFAULT_REQUEST_TIMEOUT_MS,
    DiscoveryContext,
    RouteError,
    SourceRouteResult,
    Unreachable,
    aodv_discover,
    discover,
    dsr_discover,
    forward_source_routed,
)
from .messages import (
    AodvReply,
    AodvRequest,
    DsrReply,
    DsrRequest,
    RouteMessage,
    decode_route_message,
)
from .table import (
    DEFAULT_ROUTE_LIFETIME_MS,
    RouteEntry,
    RoutingState,
    RoutingTable,
    accepts_candidate,
    install_route,
)

__all__ = [
    "AodvReply",
    "AodvRequest",
    "DEFAULT_REQUEST_TIMEOUT_MS",
    "DEFAULT_ROUTE_LIFETIME_MS",
    "DiscoveryContext",
    "DsrReply",
    "DsrRequest",
    "RouteEntry",
    "RouteError",
    "RouteMessage",
    "RoutingState",
    "RoutingTable",
    "SourceRouteResult",
    "Unreachable",
    "accepts_candidate",
    "aodv_discover",
    "decode_route_message",
    "discover",
    "dsr_discover",
    "forward_source_routed",
    "install_route",
]
