"""Wire protocol: versioned JSON text messages between operator and service.

Every message is one JSON object ``{"v": 1, "kind": ..., "seq": ...,
"t": ..., "payload": {...}}`` carried as one text frame on a reliable
ordered stream.  ``seq`` must increase strictly per direction; ``t`` is
milliseconds since session start.  Floats are encoded with ``repr`` (the
shortest exact decimal), which always carries at least full precision, so
a decoded trace matches the encoder's numbers bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Mapping

from .errors import ProtocolError, ProtocolVersionError

PROTOCOL_VERSION = 1

# payload contract per kind: field name -> required scalar type
_REAL = "real"
_STR = "str"
_VEC3 = "vec3"
_ANY_DICT = "dict"

INBOUND_SCHEMAS: dict[str, dict[str, str]] = {
    "master_delta": {"dx_mm": _REAL, "dy_mm": _REAL, "dz_mm": _REAL},
    "trigger": {},
    "pedal": {},
    "jog": {"joint": _STR, "target": _REAL},
    "set_pressure": {"pressure_kpa": _REAL},
    "set_vf_radius": {"diameter_mm": _REAL},
    "set_scale": {"k_scale": _REAL},
    "phase_event": {"event": _STR},
}
OUTBOUND_SCHEMAS: dict[str, dict[str, str]] = {
    "state_update": {"state": _ANY_DICT},
    "force_echo": {"force_n": _VEC3},
    "error": {"message": _STR},
}
KINDS = frozenset(INBOUND_SCHEMAS) | frozenset(OUTBOUND_SCHEMAS)


def _is_real(value: Any) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


def _check_payload(kind: str, payload: Mapping[str, Any]) -> None:
    schema = INBOUND_SCHEMAS.get(kind)
    if schema is None:
        schema = OUTBOUND_SCHEMAS.get(kind)
    if schema is None:
        raise ProtocolError(f"unknown message kind {kind!r}")
    extra = set(payload) - set(schema)
    missing = set(schema) - set(payload)
    if extra or missing:
        raise ProtocolError(
            f"{kind} payload fields: missing {sorted(missing)}, unexpected {sorted(extra)}"
        )
    for name, want in schema.items():
        value = payload[name]
        ok = (
            _is_real(value)
            if want == _REAL
            else isinstance(value, str)
            if want == _STR
            else isinstance(value, dict)
            if want == _ANY_DICT
            else isinstance(value, (list, tuple))
            and len(value) == 3
            and all(_is_real(v) for v in value)
        )
        if not ok:
            raise ProtocolError(f"{kind} payload field {name!r} is not a {want}")


@dataclass(frozen=True)
class WireMessage:
    """One protocol frame; ``t_ms`` is milliseconds since session start."""

    kind: str
    seq: int
    t_ms: float
    payload: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.seq, int) or isinstance(self.seq, bool) or self.seq < 0:
            raise ProtocolError(f"seq must be a non-negative integer, got {self.seq!r}")
        if not _is_real(self.t_ms) or self.t_ms < 0:
            raise ProtocolError(f"t must be a non-negative number, got {self.t_ms!r}")
        _check_payload(self.kind, self.payload)


def _scalar(value: Any) -> float:
    # numpy scalars reach payloads through session snapshots
    if _is_real(value):
        return float(value)
    raise TypeError(f"{value!r} is not wire-encodable")


def encode(message: WireMessage) -> str:
    return json.dumps(
        {
            "v": PROTOCOL_VERSION,
            "kind": message.kind,
            "seq": message.seq,
            "t": message.t_ms,
            "payload": message.payload,
        },
        separators=(",", ":"),
        allow_nan=False,
        default=_scalar,
    )


def decode(text: str | bytes) -> WireMessage:
    """Parse and validate one frame; version mismatches get their own error."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ProtocolError("message must be a JSON object")
    if raw.get("v") != PROTOCOL_VERSION:
        raise ProtocolVersionError(
            f"unsupported protocol version {raw.get('v')!r}, need {PROTOCOL_VERSION}"
        )
    for key in ("kind", "seq", "t", "payload"):
        if key not in raw:
            raise ProtocolError(f"message lacks field {key!r}")
    if not isinstance(raw["kind"], str):
        raise ProtocolError("kind must be a string")
    if not isinstance(raw["payload"], dict):
        raise ProtocolError("payload must be an object")
    return WireMessage(
        kind=raw["kind"], seq=raw["seq"], t_ms=raw["t"], payload=raw["payload"]
    )


class SequenceTracker:
    """Enforces strictly increasing seq numbers for one direction."""

    def __init__(self) -> None:
        self._last: int | None = None

    def check(self, seq: int) -> None:
        if self._last is not None and seq <= self._last:
            raise ProtocolError(f"seq {seq} not above previous {self._last}")
        self._last = seq


class SequenceSource:
    """Hands out strictly increasing seq numbers for one direction."""

    def __init__(self) -> None:
        self._next = 1

    def take(self) -> int:
        value = self._next
        self._next += 1
        return value


def state_update(seq: int, t_ms: float, state: dict) -> WireMessage:
    return WireMessage("state_update", seq, t_ms, {"state": state})


def force_echo(seq: int, t_ms: float, force_n: tuple[float, float, float]) -> WireMessage:
    return WireMessage("force_echo", seq, t_ms, {"force_n": [float(v) for v in force_n]})


def error_message(seq: int, t_ms: float, message: str) -> WireMessage:
    return WireMessage("error", seq, t_ms, {"message": message})
