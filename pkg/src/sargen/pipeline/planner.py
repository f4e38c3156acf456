"""Planning agent: deterministic typology -> agent activation mapping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..agents.findings import AGENT_IDS
from ..crimetype.model import CrimeTypeReport
from ..errors import ConfigMissing
from ..ingestion.model import CaseFile


@dataclass(frozen=True)
class AgentPlan:
    agents_to_spawn: tuple[str, ...]  # agent-enum order
    intel_queries_enabled: bool
    rationale: dict[str, str]  # agent id -> triggering typology / data gate / floor

    def to_doc(self) -> dict[str, Any]:
        return {
            "agents_to_spawn": list(self.agents_to_spawn),
            "intel_queries_enabled": self.intel_queries_enabled,
            "rationale": dict(sorted(self.rationale.items())),
        }


def plan(report: CrimeTypeReport, case: CaseFile, config: dict) -> AgentPlan:
    """Each detected typology enables its configured agent set; geo and
    country agents are data-gated; an undetected case falls back to the
    configured floor with intel disabled."""
    mapping: dict[str, list[str]] = config.get("typology_agents", {})
    rationale: dict[str, str] = {}
    for typology in report.detected:
        if typology not in mapping:
            raise ConfigMissing(f"typology {typology!r} has no agent mapping row")
        for agent_id in mapping[typology]:
            rationale.setdefault(agent_id, f"typology:{typology}")
    if case.transactions:
        rationale.setdefault("country_risk", "data:country_present")
    if any(t.geo is not None for t in case.transactions):
        rationale.setdefault("geo_anomaly", "data:geo_present")
    if not report.detected:
        for agent_id in config.get("floor_agents", ["txn_fraud"]):
            rationale.setdefault(agent_id, "floor:no_typology_detected")
    agents = tuple(a for a in AGENT_IDS if a in rationale)
    return AgentPlan(
        agents_to_spawn=agents,
        intel_queries_enabled=bool(report.detected),
        rationale=rationale,
    )
