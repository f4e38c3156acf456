"""Append-only checksummed log file: the storage engine under the memory
store and the service's case records.

Line format: ``<sha256-of-json-hex> <canonical-json>\n``. A torn final
line (crash mid-write) is dropped silently because its write was never
acknowledged; a checksum failure anywhere earlier raises CorruptSnapshot.
Appends fsync before returning.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Any

from ..errors import CorruptSnapshot, StorageFailure


def canonical_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def checksum(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class AppendLog:
    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)

    def append(self, doc: dict[str, Any]) -> None:
        payload = canonical_json(doc)
        line = f"{checksum(payload)} {payload}\n".encode("utf-8")
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "ab") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageFailure(f"append to {self.path} failed: {exc}") from exc

    def replay(self) -> list[dict[str, Any]]:
        if not self.path.exists():
            return []
        docs: list[dict[str, Any]] = []
        lines = self.path.read_bytes().split(b"\n")
        for i, line in enumerate(lines):
            if not line:
                continue
            torn_tail = i >= len(lines) - 2
            try:
                expected, payload = line.decode("utf-8").split(" ", 1)
            except (UnicodeDecodeError, ValueError) as exc:
                if torn_tail:
                    break
                raise CorruptSnapshot(f"{self.path}: log line {i} unreadable") from exc
            if checksum(payload) != expected:
                if torn_tail:
                    break
                raise CorruptSnapshot(f"{self.path}: log line {i} failed its checksum")
            docs.append(json.loads(payload))
        return docs
