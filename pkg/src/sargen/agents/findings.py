"""Structured findings emitted by the specialized detection agents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..crimetype.indicators import EvidenceRef

AGENT_IDS = (
    "txn_fraud",
    "velocity",
    "country_risk",
    "text_content",
    "geo_anomaly",
    "account_health",
    "dispute_pattern",
)

SEVERITIES = ("info", "warn", "critical")


def severity_for(metric: float, threshold: float) -> str:
    """Documented triage mapping: metric >= 2x threshold is critical, else warn."""
    return "critical" if threshold > 0 and metric >= 2 * threshold else "warn"


@dataclass(frozen=True)
class AgentFinding:
    agent_id: str
    finding_id: str  # stable within a run: "<agent>:<n>"
    severity: str
    confidence: float
    evidence: tuple[EvidenceRef, ...]
    summary: str  # masked-safe one-liner: mask tokens only, never originals
    metrics: dict[str, float]

    def to_doc(self) -> dict[str, Any]:
        return {
            "agent_id": self.agent_id,
            "finding_id": self.finding_id,
            "severity": self.severity,
            "confidence": self.confidence,
            "evidence": [e.render() for e in self.evidence],
            "summary": self.summary,
            "metrics": dict(self.metrics),
        }
