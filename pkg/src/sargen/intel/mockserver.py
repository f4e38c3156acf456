"""Bundled mock MCP server for hermetic tests.

Serves the seed fixture's tools over stdio (newline-delimited JSON) or
HTTP POST. Behavior knobs in the seed let tests exercise timeout and
protocol-violation paths:

    {"behavior": {"sleep_s": {"tool": 30},
                  "malformed_methods": ["tools/list"],
                  "error_tools": {"tool": {"code": -32000, "message": "boom"}}}}
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path
from typing import Any

PROTOCOL_VERSION = "2024-11-05"


class MockMcpServer:
    def __init__(self, seed: dict[str, Any]) -> None:
        self.seed = seed
        self.behavior = seed.get("behavior", {})

    def _result(self, request_id: Any, result: Any) -> dict[str, Any]:
        return {"jsonrpc": "2.0", "id": request_id, "result": result}

    def _error(self, request_id: Any, code: int, message: str) -> dict[str, Any]:
        return {"jsonrpc": "2.0", "id": request_id, "error": {"code": code, "message": message}}

    def handle(self, doc: dict[str, Any]) -> dict[str, Any] | None:
        method = doc.get("method", "")
        request_id = doc.get("id")
        if request_id is None:
            return None  # notification
        if method in self.behavior.get("malformed_methods", []):
            return {"totally": "not json-rpc"}
        if method == "initialize":
            return self._result(request_id, {
                "protocolVersion": PROTOCOL_VERSION,
                "capabilities": {"tools": {}},
                "serverInfo": {"name": self.seed.get("server_id", "mock-mcp"), "version": "0.1.0"},
            })
        if method == "tools/list":
            tools = [
                {
                    "name": t["name"],
                    "description": t.get("description", ""),
                    "inputSchema": t.get("input_schema", {}),
                }
                for t in self.seed.get("tools", [])
            ]
            return self._result(request_id, {"tools": tools})
        if method == "tools/call":
            params = doc.get("params", {})
            name = params.get("name")
            args = params.get("arguments", {})
            sleep_s = self.behavior.get("sleep_s", {}).get(name)
            if sleep_s:
                time.sleep(sleep_s)
            error_spec = self.behavior.get("error_tools", {}).get(name)
            if error_spec:
                return self._error(request_id, error_spec.get("code", -32000),
                                   error_spec.get("message", "tool error"))
            if name not in {t["name"] for t in self.seed.get("tools", [])}:
                return self._error(request_id, -32601, f"unknown tool {name}")
            items = self._match_items(name, args)
            text = "\n".join(i["content"] for i in items) if items else "no results"
            return self._result(request_id, {
                "content": [{"type": "text", "text": text}],
                "isError": False,
                "items": items,
            })
        return self._error(request_id, -32601, f"method not found: {method}")

    def _match_items(self, tool: str, args: dict[str, Any]) -> list[dict[str, Any]]:
        haystack = " ".join(str(v) for _, v in sorted(args.items()))
        items: list[dict[str, Any]] = []
        for rule in self.seed.get("responses", {}).get(tool, []):
            needle = rule.get("match", "")
            if not needle or needle in haystack:
                items.extend(rule.get("items", []))
        return items


def serve_stdio(server: MockMcpServer) -> None:
    for line in sys.stdin.buffer:
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            response = {"jsonrpc": "2.0", "id": None,
                        "error": {"code": -32700, "message": "parse error"}}
            sys.stdout.buffer.write(json.dumps(response).encode() + b"\n")
            sys.stdout.buffer.flush()
            continue
        response = server.handle(doc)
        if response is not None:
            sys.stdout.buffer.write(json.dumps(response, sort_keys=True).encode() + b"\n")
            sys.stdout.buffer.flush()


def serve_http(server: MockMcpServer, host: str, port: int, announce: bool = True) -> HTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self) -> None:  # noqa: N802 (http.server naming)
            length = int(self.headers.get("content-length", 0))
            body = self.rfile.read(length)
            try:
                doc = json.loads(body.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                doc = {}
            response = server.handle(doc)
            payload = json.dumps(response or {}, sort_keys=True).encode("utf-8")
            self.send_response(200)
            self.send_header("content-type", "application/json")
            self.send_header("content-length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args: Any) -> None:
            pass

    httpd = HTTPServer((host, port), Handler)
    if announce:
        print(f"mock-mcp listening on http://{host}:{httpd.server_address[1]}", flush=True)
    return httpd


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mock-mcp", description="mock MCP server for tests")
    parser.add_argument("--seed", required=True, help="seed fixture JSON path")
    parser.add_argument("--transport", choices=["stdio", "http"], default="stdio")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0)
    args = parser.parse_args(argv)
    seed = json.loads(Path(args.seed).read_text(encoding="utf-8"))
    server = MockMcpServer(seed)
    if args.transport == "stdio":
        serve_stdio(server)
    else:
        serve_http(server, args.host, args.port).serve_forever()
    return 0


if __name__ == "__main__":
    sys.exit(main())
