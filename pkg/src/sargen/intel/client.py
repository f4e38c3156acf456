"""MCP client: initialize, tools/list, tools/call.

Every outbound payload is recorded on the client (``sent_payloads``) so
tests can run the zero-leak scan and golden-file wire comparisons against
exactly what crossed the trust boundary.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

import jsonschema

from ..errors import ArgsSchemaViolation, ToolTimeout, TransportError, UnknownTool
from .jsonrpc import decode_response, encode_request
from .transports import HttpTransport, StdioTransport, Transport

PROTOCOL_VERSION = "2024-11-05"
CLIENT_INFO = {"name": "sargen-intel", "version": "0.1.0"}
DEFAULT_TIMEOUT_S = 10.0
DEFAULT_TOOL_CACHE_TTL_S = 300.0


@dataclass(frozen=True)
class McpToolDescriptor:
    name: str
    description: str
    input_schema: dict[str, Any]
    server_id: str

    def to_doc(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "input_schema": self.input_schema,
            "server_id": self.server_id,
        }


@dataclass(frozen=True)
class ServerConfig:
    server_id: str
    transport: str  # "stdio" | "http"
    endpoint: str | None = None  # http URL
    command: tuple[str, ...] = ()  # stdio spawn argv

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "ServerConfig":
        return cls(
            server_id=doc["server_id"],
            transport=doc["transport"],
            endpoint=doc.get("endpoint"),
            command=tuple(doc.get("command", [])),
        )


@dataclass
class McpClient:
    config: ServerConfig
    timeout_s: float = DEFAULT_TIMEOUT_S
    retries: int = 1
    tool_cache_ttl_s: float = DEFAULT_TOOL_CACHE_TTL_S
    sent_payloads: list[bytes] = field(default_factory=list)
    _transport: Transport | None = None
    _next_id: int = 1
    _tools: dict[str, McpToolDescriptor] | None = None
    _tools_fetched_at: float = 0.0

    def _ensure_transport(self) -> Transport:
        if self._transport is None:
            if self.config.transport == "stdio":
                self._transport = StdioTransport(list(self.config.command))
            elif self.config.transport == "http":
                if not self.config.endpoint:
                    raise TransportError(f"server {self.config.server_id}: http endpoint missing")
                self._transport = HttpTransport(self.config.endpoint)
            else:
                raise TransportError(f"unknown transport {self.config.transport!r}")
            self._handshake()
        return self._transport

    def _handshake(self) -> None:
        params = {
            "protocolVersion": PROTOCOL_VERSION,
            "capabilities": {"tools": {}},
            "clientInfo": CLIENT_INFO,
        }
        self._call("initialize", params)
        note = encode_request("notifications/initialized", None, None)
        self.sent_payloads.append(note)
        self._transport.notify(note)

    def _call(self, method: str, params: dict[str, Any] | None) -> Any:
        request_id = self._next_id
        self._next_id += 1
        payload = encode_request(method, params, request_id)
        self.sent_payloads.append(payload)
        attempts = 1 + max(0, self.retries)
        last_timeout: ToolTimeout | None = None
        for _ in range(attempts):
            try:
                raw = self._transport.round_trip(payload, self.timeout_s, expected_id=request_id)
                return decode_response(raw, request_id)
            except ToolTimeout as exc:
                last_timeout = exc
        raise last_timeout

    def discover_tools(self, *, force: bool = False) -> list[McpToolDescriptor]:
        """tools/list, cached with a TTL."""
        self._ensure_transport()
        now = time.monotonic()
        if (
            not force
            and self._tools is not None
            and now - self._tools_fetched_at < self.tool_cache_ttl_s
        ):
            return list(self._tools.values())
        result = self._call("tools/list", {})
        tools = {}
        for item in result.get("tools", []):
            descriptor = McpToolDescriptor(
                name=item["name"],
                description=item.get("description", ""),
                input_schema=item.get("inputSchema", {}),
                server_id=self.config.server_id,
            )
            tools[descriptor.name] = descriptor
        self._tools = tools
        self._tools_fetched_at = now
        return list(tools.values())

    def invoke_tool(self, tool_name: str, args: dict[str, Any]) -> dict[str, Any]:
        """tools/call after validating args against the discovered schema."""
        self._ensure_transport()
        if self._tools is None:
            self.discover_tools()
        descriptor = self._tools.get(tool_name)
        if descriptor is None:
            raise UnknownTool(f"{tool_name!r} not discovered on {self.config.server_id}")
        try:
            jsonschema.validate(args, descriptor.input_schema)
        except jsonschema.ValidationError as exc:
            # Gate before any network call.
            raise ArgsSchemaViolation(f"{tool_name} args invalid: {exc.message}") from exc
        return self._call("tools/call", {"name": tool_name, "arguments": args})

    def close(self) -> None:
        if self._transport is not None:
            self._transport.close()
            self._transport = None


def discover_tools(client: McpClient) -> list[McpToolDescriptor]:
    return client.discover_tools()


def invoke_tool(client: McpClient, tool_name: str, args: dict[str, Any]) -> dict[str, Any]:
    return client.invoke_tool(tool_name, args)
