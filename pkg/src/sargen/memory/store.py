"""Three-tier persistent memory: regulatory, historical narrative, typology-specific.

Storage is the shared append-only checksummed log (see ``memory.log``);
the in-memory index is rebuilt by scanning on open. Writes fsync before
acknowledging. Retrieval is lexical and deterministic:
``score = 2*|tag intersection| + token_jaccard(query text, content)``.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from ..errors import CorruptSnapshot, StorageFailure, ValidationFailure
from .log import AppendLog, canonical_json, checksum

TIERS = ("regulatory", "historical_narrative", "typology_specific")

_WORD_RE = re.compile(r"[a-z0-9_]+")


def tokenize(text: str) -> set[str]:
    return set(_WORD_RE.findall(text.lower()))


def token_jaccard(a: str, b: str) -> float:
    ta, tb = tokenize(a), tokenize(b)
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


@dataclass(frozen=True)
class MemoryRecord:
    id: str
    tier: str
    key: str
    content: str
    tags: frozenset[str]
    version: int
    created_at: datetime
    updated_at: datetime
    extras: dict[str, Any] = field(default_factory=dict)  # unknown fields, preserved

    def to_doc(self) -> dict[str, Any]:
        doc = {
            "id": self.id,
            "tier": self.tier,
            "key": self.key,
            "content": self.content,
            "tags": sorted(self.tags),
            "version": self.version,
            "created_at": self.created_at.isoformat(),
            "updated_at": self.updated_at.isoformat(),
        }
        doc.update(self.extras)
        return doc

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "MemoryRecord":
        known = {"id", "tier", "key", "content", "tags", "version", "created_at", "updated_at"}
        return cls(
            id=doc["id"],
            tier=doc["tier"],
            key=doc.get("key", doc["id"]),
            content=doc.get("content", ""),
            tags=frozenset(doc.get("tags", [])),
            version=int(doc.get("version", 1)),
            created_at=datetime.fromisoformat(doc["created_at"]),
            updated_at=datetime.fromisoformat(doc["updated_at"]),
            extras={k: v for k, v in doc.items() if k not in known},
        )


@dataclass(frozen=True)
class RetrievalQuery:
    tier: str
    tags: frozenset[str] = frozenset()
    text: str | None = None
    k: int = 5


class MemoryStore:
    """Append-only versioned store; one writer, many readers."""

    def __init__(self, path: str | Path | None = None) -> None:
        self.path = Path(path) if path is not None else None
        self._log = AppendLog(self.path) if self.path is not None else None
        self._history: dict[str, list[MemoryRecord]] = {}
        self._order: list[str] = []  # insertion order of ids, for stable iteration
        self._lock = threading.Lock()
        if self._log is not None:
            for doc in self._log.replay():
                self._index(MemoryRecord.from_doc(doc))

    def _index(self, record: MemoryRecord) -> None:
        history = self._history.setdefault(record.id, [])
        if not history:
            self._order.append(record.id)
        history.append(record)

    def _append_line(self, doc: dict[str, Any]) -> None:
        if self._log is not None:
            self._log.append(doc)

    # --- operations -----------------------------------------------------

    def put(self, id: str, tier: str, key: str, content: str,
            tags: set[str] | frozenset[str] = frozenset(),
            *, now: datetime | None = None, extras: dict[str, Any] | None = None) -> MemoryRecord:
        """Durably store a record version; prior versions stay readable."""
        if tier not in TIERS:
            raise ValidationFailure(f"unknown memory tier {tier!r}")
        stamp = now or datetime.now(timezone.utc)
        with self._lock:
            history = self._history.get(id, [])
            if history and history[0].tier != tier:
                raise ValidationFailure(
                    f"record {id!r} is pinned to tier {history[0].tier!r}; tier is immutable"
                )
            record = MemoryRecord(
                id=id,
                tier=tier,
                key=key,
                content=content,
                tags=frozenset(tags),
                version=(history[-1].version + 1) if history else 1,
                created_at=history[0].created_at if history else stamp,
                updated_at=stamp,
                extras=dict(extras or {}),
            )
            self._append_line(record.to_doc())
            self._index(record)
            return record

    def get(self, id: str, version: int | None = None) -> MemoryRecord | None:
        history = self._history.get(id)
        if not history:
            return None
        if version is None:
            return history[-1]
        for record in history:
            if record.version == version:
                return record
        return None

    def latest(self) -> list[MemoryRecord]:
        return [self._history[i][-1] for i in self._order]

    def query(self, q: RetrievalQuery) -> list[tuple[MemoryRecord, float]]:
        """Top-k latest-version records of the tier under the lexical score."""
        if q.k < 1:
            raise ValidationFailure("k must be >= 1")
        candidates = [r for r in self.latest() if r.tier == q.tier]
        scored = []
        for record in candidates:
            score = 2.0 * len(q.tags & record.tags)
            if q.text:
                score += token_jaccard(q.text, record.content)
            scored.append((record, score))
        scored.sort(key=lambda item: (-item[1], _desc_dt(item[0].updated_at), item[0].id))
        return scored[: q.k]

    # --- snapshot / load -------------------------------------------------

    def snapshot(self, path: str | Path) -> None:
        """Write the full store (all versions) to one checksummed JSON file."""
        docs = [r.to_doc() for id_ in self._order for r in self._history[id_]]
        body = canonical_json({"records": docs})
        doc = {"format": "sargen-memory-snapshot-v1", "checksum": checksum(body), "body": body}
        try:
            Path(path).write_text(json.dumps(doc), encoding="utf-8")
        except OSError as exc:
            raise StorageFailure(f"snapshot to {path} failed: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path, log_path: str | Path | None = None) -> "MemoryStore":
        try:
            raw = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageFailure(f"cannot read snapshot {path}: {exc}") from exc
        try:
            doc = json.loads(raw)
            body = doc["body"]
            expected = doc["checksum"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorruptSnapshot(f"snapshot {path} is malformed") from exc
        if checksum(body) != expected:
            raise CorruptSnapshot(f"snapshot {path} failed its checksum")
        store = cls(log_path)
        for record_doc in json.loads(body)["records"]:
            record = MemoryRecord.from_doc(record_doc)
            store._append_line(record.to_doc())
            store._index(record)
        return store


def _desc_dt(dt: datetime) -> float:
    return -dt.timestamp()
