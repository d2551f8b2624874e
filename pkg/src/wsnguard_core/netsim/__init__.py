"""Network substrate: topology, wire packets, energy, reliability, beacon tree and metrics.

The event loop itself lives in `wsnguard_core.netsim.engine`.
"""

from .beacon import BeaconRoutes, beacon_tree_route
from .energy import (
    DEFAULT_ASYM_COSTS_MJ,
    DEFAULT_CIPHER_CLOCKS,
    DEFAULT_CIPHER_MULTIPLIERS,
    AsymCost,
    ChargeResult,
    CryptoOp,
    Direction,
    EnergyCategory,
    EnergyLedger,
    EnergyModel,
    UnknownAlgorithm,
    build_energy_model,
    charge_crypto,
    charge_idle,
    charge_processing,
    charge_radio,
    crypto_cost_uj,
    mj_to_uj,
    radio_cost_uj,
    uj_to_mj,
)
from .metrics import (
    METRICS_COLUMNS,
    MetricRow,
    MetricsCollector,
    MetricsReport,
    read_detection_csv,
    read_metrics_csv,
    read_summary_json,
    write_detection_csv,
    write_metrics_csv,
    write_summary_json,
)
from .packets import HEADER_BYTES, MAX_WIRE_PAYLOAD, WirePacket
from .reliable import (
    HopOutcome,
    HopStatus,
    LossRule,
    LossScript,
    ReliabilityPolicy,
    send_reliable,
    send_unreliable,
    transmit_hop,
)
from .topology import (
    InvalidConfig,
    Mote,
    MotePlacement,
    Network,
    TopologyConfig,
    build_topology,
    neighbor_table,
)

__all__ = [
    "AsymCost",
    "BeaconRoutes",
    "ChargeResult",
    "CryptoOp",
    "DEFAULT_ASYM_COSTS_MJ",
    "DEFAULT_CIPHER_CLOCKS",
    "DEFAULT_CIPHER_MULTIPLIERS",
    "Direction",
    "EnergyCategory",
    "EnergyLedger",
    "EnergyModel",
    "HEADER_BYTES",
    "HopOutcome",
    "HopStatus",
    "InvalidConfig",
    "LossRule",
    "LossScript",
    "MAX_WIRE_PAYLOAD",
    "METRICS_COLUMNS",
    "MetricRow",
    "MetricsCollector",
    "MetricsReport",
    "Mote",
    "MotePlacement",
    "Network",
    "ReliabilityPolicy",
    "TopologyConfig",
    "UnknownAlgorithm",
    "WirePacket",
    "beacon_tree_route",
    "build_energy_model",
    "build_topology",
    "charge_crypto",
    "charge_idle",
    "charge_processing",
    "charge_radio",
    "crypto_cost_uj",
    "mj_to_uj",
    "neighbor_table",
    "radio_cost_uj",
    "read_detection_csv",
    "read_metrics_csv",
    "read_summary_json",
    "send_reliable",
    "send_unreliable",
    "transmit_hop",
    "uj_to_mj",
    "write_detection_csv",
    "write_metrics_csv",
    "write_summary_json",
]
