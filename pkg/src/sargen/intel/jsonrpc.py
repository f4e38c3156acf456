"""JSON-RPC 2.0 envelope helpers with canonical wire encoding.

Requests are serialized compact with sorted keys so the wire bytes are
stable enough for golden-file tests.
"""

from __future__ import annotations

import json
from typing import Any

from ..errors import ProtocolViolation

JSONRPC_VERSION = "2.0"


def encode_request(method: str, params: dict[str, Any] | None, request_id: int | None) -> bytes:
    doc: dict[str, Any] = {"jsonrpc": JSONRPC_VERSION, "method": method}
    if params is not None:
        doc["params"] = params
    if request_id is not None:
        doc["id"] = request_id
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def decode_response(raw: bytes, expected_id: int) -> Any:
    """Validate the envelope and return the result payload.

    A JSON-RPC error object or any envelope violation raises
    ProtocolViolation with the offending payload retained for audit.
    """
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolViolation(f"response is not JSON: {exc}", payload=raw) from exc
    if not isinstance(doc, dict) or doc.get("jsonrpc") != JSONRPC_VERSION:
        raise ProtocolViolation("response missing jsonrpc 2.0 envelope", payload=doc)
    if "error" in doc:
        err = doc["error"] or {}
        raise ProtocolViolation(
            f"server error {err.get('code')}: {err.get('message')}", payload=doc
        )
    if doc.get("id") != expected_id:
        raise ProtocolViolation(
            f"response id {doc.get('id')!r} does not match request id {expected_id}", payload=doc
        )
    if "result" not in doc:
        raise ProtocolViolation("response carries neither result nor error", payload=doc)
    return doc["result"]
