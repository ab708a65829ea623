"""Frame and envelope codec: the one wire format every transport carries.

A frame is a 4-byte big-endian payload length followed by the payload:
UTF-8 bytes of exactly one JSON object. Payloads are capped at 1 MiB;
any violation is fatal for the connection (there is no resync).

The JSON object is an envelope. Canonical encoding emits fields in the
order v, type, cid, from, payload, with compact separators and absent
optionals omitted, so equal envelopes encode to identical bytes.
Decoders ignore unknown fields (additive evolution) and surface unknown
type strings as-is for the caller to reject.

TCP carries full frames. WebSocket carries only the JSON payload, one
text message per envelope (the socket's own message boundary replaces
the length prefix). The in-memory transport moves Frame values.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Any, Optional

MAX_PAYLOAD = 1 << 20  # 1 MiB
PROTOCOL_VERSION = 1

ENVELOPE_TYPES = frozenset(
    {
        "join_request",
        "join_accepted",
        "join_rejected",
        "rejoin_request",
        "rejoin_accepted",
        "rejoin_rejected",
        "leave",
        "room_event",
        "rpc_request",
        "rpc_response",
        "error",
    }
)

_LEN = struct.Struct(">I")


class WireError(Exception):
    """Base class for framing violations. All of them kill the channel."""


class OversizeFrame(WireError):
    """Payload exceeds MAX_PAYLOAD (declared or actual)."""


class MalformedFrame(WireError):
    """Payload is not valid UTF-8 JSON, not an object, or lacks v/type."""


class TruncatedFrame(WireError):
    """Byte stream ended in the middle of a frame."""


@dataclass(frozen=True)
class Frame:
    """One transport message: the canonical JSON payload bytes of an envelope."""

    payload: bytes

    def __post_init__(self) -> None:
        if len(self.payload) > MAX_PAYLOAD:
            raise OversizeFrame(
                f"payload is {len(self.payload)} bytes, cap is {MAX_PAYLOAD}"
            )

    @property
    def length(self) -> int:
        return len(self.payload)


@dataclass(frozen=True)
class Envelope:
    """Typed message unit. `sender` maps to the wire field "from"."""

    type: str
    v: int = PROTOCOL_VERSION
    cid: Optional[int] = None
    sender: Optional[str] = None
    payload: dict = field(default_factory=dict)


def encode_payload(env: Envelope) -> bytes:
    """Canonical JSON bytes of an envelope (no length prefix)."""
    obj: dict[str, Any] = {"v": env.v, "type": env.type}
    if env.cid is not None:
        obj["cid"] = env.cid
    if env.sender is not None:
        obj["from"] = env.sender
    if env.payload:
        obj["payload"] = env.payload
    data = json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    if len(data) > MAX_PAYLOAD:
        raise OversizeFrame(f"encoded envelope is {len(data)} bytes, cap is {MAX_PAYLOAD}")
    return data


def decode_payload(data: bytes) -> Envelope:
    """Parse envelope payload bytes. Unknown JSON fields are ignored."""
    if len(data) > MAX_PAYLOAD:
        raise OversizeFrame(f"payload is {len(data)} bytes, cap is {MAX_PAYLOAD}")
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrame(f"payload is not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedFrame("payload is not a JSON object")
    if "v" not in obj or "type" not in obj:
        raise MalformedFrame("envelope missing v or type")
    v = obj["v"]
    typ = obj["type"]
    if not isinstance(v, int) or not isinstance(typ, str):
        raise MalformedFrame("envelope v/type have wrong JSON types")
    cid = obj.get("cid")
    if cid is not None and not isinstance(cid, int):
        raise MalformedFrame("cid is not an integer")
    sender = obj.get("from")
    if sender is not None and not isinstance(sender, str):
        raise MalformedFrame("from is not a string")
    payload = obj.get("payload", {})
    if not isinstance(payload, dict):
        raise MalformedFrame("payload field is not an object")
    return Envelope(type=typ, v=v, cid=cid, sender=sender, payload=payload)


def encode_frame(env: Envelope) -> bytes:
    """Envelope -> length-prefixed frame bytes (the TCP wire form)."""
    payload = encode_payload(env)
    return _LEN.pack(len(payload)) + payload


def decode_frame(data: bytes) -> tuple[Envelope, int]:
    """Parse one frame at the start of `data`.

    Returns (envelope, bytes_consumed). Raises TruncatedFrame if `data`
    ends mid-frame, OversizeFrame if the declared length exceeds the cap
    (callers must close the connection), MalformedFrame on bad payload.
    """
    if len(data) < _LEN.size:
        raise TruncatedFrame("stream ended inside the length prefix")
    (length,) = _LEN.unpack_from(data)
    if length > MAX_PAYLOAD:
        raise OversizeFrame(f"declared length {length} exceeds cap {MAX_PAYLOAD}")
    end = _LEN.size + length
    if len(data) < end:
        raise TruncatedFrame(f"frame declares {length} payload bytes, stream has fewer")
    env = decode_payload(data[_LEN.size:end])
    return env, end


def frame_for(env: Envelope) -> Frame:
    """Envelope -> Frame (the unit Channels carry)."""
    return Frame(encode_payload(env))


def envelope_of(frame: Frame) -> Envelope:
    return decode_payload(frame.payload)
