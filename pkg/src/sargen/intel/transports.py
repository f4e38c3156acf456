"""MCP transports: newline-delimited JSON over a spawned stdio subprocess,
and single-shot HTTP POST."""

from __future__ import annotations

import json
import select
import time
import subprocess
from typing import Protocol

import httpx

from ..errors import ToolTimeout, TransportError


class Transport(Protocol):
    def round_trip(self, payload: bytes, timeout_s: float, expected_id: int | None = None) -> bytes: ...

    def notify(self, payload: bytes) -> None: ...

    def close(self) -> None: ...


class StdioTransport:
    """Spawns the server command once; one JSON document per line each way."""

    def __init__(self, command: list[str]) -> None:
        try:
            self._proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise TransportError(f"cannot spawn {command!r}: {exc}") from exc

    def _write(self, payload: bytes) -> None:
        if self._proc.poll() is not None:
            raise TransportError("server process has exited")
        try:
            self._proc.stdin.write(payload + b"\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"write to server failed: {exc}") from exc

    def round_trip(self, payload: bytes, timeout_s: float, expected_id: int | None = None) -> bytes:
        self._write(payload)
        deadline = time.monotonic() + timeout_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ToolTimeout(f"no response within {timeout_s}s")
            ready, _, _ = select.select([self._proc.stdout], [], [], remaining)
            if not ready:
                raise ToolTimeout(f"no response within {timeout_s}s")
            line = self._proc.stdout.readline()
            if not line:
                raise TransportError("server closed the stream")
            line = line.rstrip(b"\n")
            if expected_id is None:
                return line
            # A lower response id is a late arrival from a request that
            # already timed out (possibly re-sent); drop it and keep reading.
            # Anything else goes to the caller so envelope validation can run.
            try:
                doc = json.loads(line)
            except json.JSONDecodeError:
                return line
            if (
                isinstance(doc, dict)
                and isinstance(doc.get("id"), int)
                and doc["id"] < expected_id
            ):
                continue
            return line

    def notify(self, payload: bytes) -> None:
        self._write(payload)

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()


class HttpTransport:
    """JSON-RPC over HTTP POST; one request per call, no streaming."""

    def __init__(self, endpoint: str) -> None:
        self.endpoint = endpoint
        self._client = httpx.Client()

    def round_trip(self, payload: bytes, timeout_s: float, expected_id: int | None = None) -> bytes:
        try:
            response = self._client.post(
                self.endpoint,
                content=payload,
                headers={"content-type": "application/json"},
                timeout=timeout_s,
            )
        except httpx.TimeoutException as exc:
            raise ToolTimeout(f"no response within {timeout_s}s") from exc
        except httpx.HTTPError as exc:
            raise TransportError(f"POST {self.endpoint} failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"POST {self.endpoint} returned {response.status_code}")
        return response.content

    def notify(self, payload: bytes) -> None:
        try:
            self._client.post(
                self.endpoint,
                content=payload,
                headers={"content-type": "application/json"},
                timeout=5.0,
            )
        except httpx.HTTPError:
            pass  # notifications are fire-and-forget

    def close(self) -> None:
        self._client.close()
