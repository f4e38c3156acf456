"""Case persistence: command-sourced log over the shared append engine.

The service logs three commands: case_created (with the raw case bytes),
run_requested, and feedback_applied (only after the feedback fully
applied). Recovery replays commands through the deterministic pipeline,
so a process killed mid-regeneration comes back in awaiting_review with
the prior draft version intact: the regeneration's feedback command was
never acknowledged.
"""

from __future__ import annotations

import base64
from pathlib import Path
from typing import Any

from ..memory.log import AppendLog


class CaseCommandLog:
    def __init__(self, path: str | Path) -> None:
        self._log = AppendLog(path)

    def case_created(self, case_id: str, raw: bytes) -> None:
        self._log.append(
            {
                "type": "case_created",
                "case_id": case_id,
                "raw_b64": base64.b64encode(raw).decode("ascii"),
            }
        )

    def run_requested(self, case_id: str) -> None:
        self._log.append({"type": "run_requested", "case_id": case_id})

    def feedback_applied(self, case_id: str, item_doc: dict[str, Any]) -> None:
        self._log.append({"type": "feedback_applied", "case_id": case_id, "item": item_doc})

    def replay(self) -> dict[str, dict[str, Any]]:
        """case_id -> {raw: bytes, run_requested: bool, feedback: [item docs]}"""
        cases: dict[str, dict[str, Any]] = {}
        for doc in self._log.replay():
            case_id = doc.get("case_id", "")
            entry = cases.setdefault(
                case_id, {"raw": None, "run_requested": False, "feedback": []}
            )
            if doc["type"] == "case_created":
                entry["raw"] = base64.b64decode(doc["raw_b64"])
            elif doc["type"] == "run_requested":
                entry["run_requested"] = True
            elif doc["type"] == "feedback_applied":
                entry["feedback"].append(doc["item"])
        return cases
