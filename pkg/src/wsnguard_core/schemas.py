from __future__ import annotations

from enum import StrEnum
from typing import Any, TypeVar

from pydantic import BaseModel, ConfigDict

TModel = TypeVar("TModel", bound=BaseModel)

BROADCAST_ID = 0xFFFF


class DTOBase(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProtectionMode(StrEnum):
    AUTH_ENC = "auth_enc"
    AUTH_ONLY = "auth_only"
    NONE = "none"


class Reliability(StrEnum):
    RELIABLE = "reliable"
    UNRELIABLE = "unreliable"


class PacketKind(StrEnum):
    DATA = "data"
    ROUTE_CTL = "route_ctl"
    BEACON = "beacon"
    PROBE = "probe"
    KEY_DISCLOSURE = "key_disclosure"
    HELLO = "hello"


class MoteRole(StrEnum):
    HONEST = "honest"
    SINK = "sink"
    ATTACKER = "attacker"


class RoutingVariant(StrEnum):
    BEACON_TREE = "beacon_tree"
    AODV = "aodv"
    DSR = "dsr"


class AttackerKind(StrEnum):
    SPOOF = "spoof"
    SELECTIVE_FORWARD = "selective_forward"
    SINKHOLE = "sinkhole"
    WORMHOLE = "wormhole"
    SYBIL = "sybil"
    HELLO_FLOOD = "hello_flood"
    FIELD_MODIFY = "field_modify"


class ModifyTarget(StrEnum):
    SEQ_NO = "seq_no"
    HOP_COUNT = "hop_count"
    SOURCE_ROUTE = "source_route"


class AlterPolicy(StrEnum):
    BIT_FLIP = "bit_flip"
    REPLACE = "replace"


def json_schema_for(model_cls: type[TModel]) -> dict[str, Any]:
    return model_cls.model_json_schema()


def validate_json(model_cls: type[TModel], payload: str | bytes | bytearray) -> TModel:
    return model_cls.model_validate_json(payload)
