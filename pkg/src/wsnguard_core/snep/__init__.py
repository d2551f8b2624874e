"""Pairwise secure channels with a shared, never-transmitted counter."""

from .channel import (
    DEFAULT_MAX_PAYLOAD_BYTES,
    DEFAULT_RECEIVE_WINDOW,
    CounterExhausted,
    MacMismatch,
    PayloadTooLarge,
    SecuredPayload,
    SnepChannel,
    SnepError,
    StaleCounter,
    counter_resync,
    open_channel_pair,
    resync_proof,
    snep_receive,
    snep_receive_window,
    snep_send,
)

__all__ = [
    "DEFAULT_MAX_PAYLOAD_BYTES",
    "DEFAULT_RECEIVE_WINDOW",
    "CounterExhausted",
    "MacMismatch",
    "PayloadTooLarge",
    "SecuredPayload",
    "SnepChannel",
    "SnepError",
    "StaleCounter",
    "counter_resync",
    "open_channel_pair",
    "resync_proof",
    "snep_receive",
    "snep_receive_window",
    "snep_send",
]
