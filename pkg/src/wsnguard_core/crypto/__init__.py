"""Deterministic keyed primitives shared by every protocol module."""

from .primitives import (
    KEY_SIZE,
    MAX_COUNTER,
    TAG_SIZE,
    InvalidKey,
    Key,
    Tag,
    derive_key,
    hash_forward,
    keystream,
    mac,
    prf,
    tags_match,
)

__all__ = [
    "KEY_SIZE",
    "MAX_COUNTER",
    "TAG_SIZE",
    "InvalidKey",
    "Key",
    "Tag",
    "derive_key",
    "hash_forward",
    "keystream",
    "mac",
    "prf",
    "tags_match",
]
