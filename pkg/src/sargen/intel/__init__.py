"""External intelligence over the Model Context Protocol."""

from .client import McpClient, McpToolDescriptor, ServerConfig, discover_tools, invoke_tool
from .gather import DEFAULT_QUERY_PLAN, IntelBatch, IntelFinding, gather_intel
from .jsonrpc import decode_response, encode_request
from .mockserver import MockMcpServer, serve_http, serve_stdio

__all__ = [
    "DEFAULT_QUERY_PLAN",
    "IntelBatch",
    "IntelFinding",
    "McpClient",
    "McpToolDescriptor",
    "MockMcpServer",
    "ServerConfig",
    "decode_response",
    "discover_tools",
    "encode_request",
    "gather_intel",
    "invoke_tool",
    "serve_http",
    "serve_stdio",
]
