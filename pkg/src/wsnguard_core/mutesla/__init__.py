"""Authenticated broadcast through a one-way key chain with delayed disclosure."""

from .chain import (
    DEFAULT_CHAIN_LENGTH,
    DEFAULT_DISCLOSURE_DELAY,
    DEFAULT_INTERVAL_MS,
    DEFAULT_MAX_CLOCK_ERROR_MS,
    BroadcastPacket,
    ChainExpired,
    ChainParams,
    DisclosedKey,
    KeyChain,
    decode_broadcast,
    decode_disclosure,
    encode_broadcast,
    encode_disclosure,
    generate_chain,
    mt_broadcast,
    mt_disclose,
)
from .receiver import (
    BadChainKey,
    BufferedBroadcast,
    DiscardReason,
    ReceiveOutcome,
    ReceiverState,
    ReceiveStatus,
    mt_on_disclosure,
    mt_receive,
    purge_unverifiable,
)

__all__ = [
    "DEFAULT_CHAIN_LENGTH",
    "DEFAULT_DISCLOSURE_DELAY",
    "DEFAULT_INTERVAL_MS",
    "DEFAULT_MAX_CLOCK_ERROR_MS",
    "BadChainKey",
    "BroadcastPacket",
    "BufferedBroadcast",
    "ChainExpired",
    "ChainParams",
    "DiscardReason",
    "DisclosedKey",
    "KeyChain",
    "ReceiveOutcome",
    "ReceiveStatus",
    "ReceiverState",
    "decode_broadcast",
    "decode_disclosure",
    "encode_broadcast",
    "encode_disclosure",
    "generate_chain",
    "mt_broadcast",
    "mt_disclose",
    "mt_on_disclosure",
    "mt_receive",
    "purge_unverifiable",
]
