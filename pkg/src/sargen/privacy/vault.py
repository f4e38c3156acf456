"""Case-scoped masking vault: the reversible token <-> original bijection."""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import UnknownToken

TOKEN_PREFIX = "[["
TOKEN_SUFFIX = "]]"


def format_token(category: str, n: int) -> str:
    return f"{TOKEN_PREFIX}{category}_{n}{TOKEN_SUFFIX}"


@dataclass
class VaultEntry:
    token: str
    original: str
    category: str


class MaskingVault:
    """Bijection between originals and mask tokens, deterministic per case.

    The same (original, category) pair always yields the same token within
    a case; no token is ever reused. Writes are serialized by an internal
    lock (the orchestrator is the single writer per case; the lock guards
    against accidental concurrent use).
    """

    def __init__(self, case_id: str) -> None:
        self.case_id = case_id
        self._by_key: dict[tuple[str, str], VaultEntry] = {}
        self._by_token: dict[str, VaultEntry] = {}
        self._counters: dict[str, int] = {}
        self._lock = threading.Lock()

    def token_for(self, original: str, category: str) -> str:
        """Return the stable token for an original, minting one if new."""
        key = (category, original)
        with self._lock:
            entry = self._by_key.get(key)
            if entry is None:
                self._counters[category] = self._counters.get(category, 0) + 1
                token = format_token(category, self._counters[category])
                entry = VaultEntry(token=token, original=original, category=category)
                self._by_key[key] = entry
                self._by_token[token] = entry
            return entry.token

    def lookup(self, token: str) -> VaultEntry:
        entry = self._by_token.get(token)
        if entry is None:
            raise UnknownToken(token)
        return entry

    def has_token(self, token: str) -> bool:
        return token in self._by_token

    def originals(self) -> list[VaultEntry]:
        """Entries ordered longest-original-first for safe verbatim re-masking."""
        return sorted(self._by_token.values(), key=lambda e: (-len(e.original), e.token))

    def __len__(self) -> int:
        return len(self._by_token)

    # --- persistence: documented JSON, originals base64 at field level ---

    def to_doc(self) -> dict:
        return {
            "case_id": self.case_id,
            "counters": dict(sorted(self._counters.items())),
            "entries": [
                {
                    "token": e.token,
                    "category": e.category,
                    "original_b64": base64.b64encode(e.original.encode("utf-8")).decode("ascii"),
                }
                for e in sorted(self._by_token.values(), key=lambda e: e.token)
            ],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "MaskingVault":
        vault = cls(doc["case_id"])
        vault._counters = dict(doc.get("counters", {}))
        for item in doc.get("entries", []):
            original = base64.b64decode(item["original_b64"]).decode("utf-8")
            entry = VaultEntry(token=item["token"], original=original, category=item["category"])
            vault._by_token[entry.token] = entry
            vault._by_key[(entry.category, entry.original)] = entry
        return vault

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_doc(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MaskingVault":
        return cls.from_doc(json.loads(Path(path).read_text(encoding="utf-8")))
