"""External intelligence gathering: typology-driven MCP query plan.

The query plan maps each detected typology to tool/template rows;
``{subjects}`` expands to the joined masked subject tokens and rows with
``{subject}`` fan out per subject. Queries cross the trust boundary, so
they must already be masked. Per-server failures become diagnostics; the
batch never aborts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Sequence

from ..errors import SargenError
from ..memory.store import token_jaccard
from .client import McpClient

FINDING_KINDS = ("negative_news", "sanctions_hit", "advisory", "watchlist")
_TOOL_KIND_DEFAULTS = {
    "negative_news_search": "negative_news",
    "sanctions_lookup": "sanctions_hit",
}

DEFAULT_QUERY_PLAN: dict[str, list[dict[str, Any]]] = {
    "*": [{"tool": "sanctions_lookup", "args": {"name": "{subject}"}}],
    "elder_exploitation": [{"tool": "negative_news_search", "args": {"query": "elder financial exploitation {subjects}"}}],
    "romance_scam": [{"tool": "negative_news_search", "args": {"query": "romance scam victim funds {subjects}"}}],
    "human_trafficking": [{"tool": "negative_news_search", "args": {"query": "human trafficking network payments {subjects}"}}],
    "money_mule": [{"tool": "negative_news_search", "args": {"query": "money mule recruitment network {subjects}"}}],
    "terrorist_financing": [{"tool": "negative_news_search", "args": {"query": "terrorist financing facilitation {subjects}"}}],
    "csam": [{"tool": "negative_news_search", "args": {"query": "illicit content subscription payments {subjects}"}}],
    "identity_theft": [{"tool": "negative_news_search", "args": {"query": "identity theft account takeover {subjects}"}}],
    "fraud_scheme": [{"tool": "negative_news_search", "args": {"query": "fraud scheme victim complaints {subjects}"}}],
}

DEFAULT_FINDING_CAP = 5


@dataclass(frozen=True)
class IntelFinding:
    finding_id: str
    server_id: str
    tool: str
    query: str  # serialized masked args actually sent
    content: str
    relevance: float
    kind: str
    retrieved_at: datetime

    def to_doc(self) -> dict[str, Any]:
        return {
            "finding_id": self.finding_id,
            "server_id": self.server_id,
            "tool": self.tool,
            "query": self.query,
            "content": self.content,
            "relevance": self.relevance,
            "kind": self.kind,
            "retrieved_at": self.retrieved_at.isoformat(),
        }


@dataclass(frozen=True)
class IntelBatch:
    findings: tuple[IntelFinding, ...]
    diagnostics: tuple[str, ...]

    def to_doc(self) -> dict[str, Any]:
        return {
            "findings": [f.to_doc() for f in self.findings],
            "diagnostics": list(self.diagnostics),
        }


def _expand_rows(plan: dict, typology: str, subjects: Sequence[str]) -> list[dict[str, Any]]:
    rows = []
    joined = " ".join(subjects)
    for row in plan.get(typology, []):
        template_args = row.get("args", {})
        if any("{subject}" in str(v) for v in template_args.values()):
            for subject in subjects:
                args = {
                    k: str(v).replace("{subject}", subject).replace("{subjects}", joined)
                    for k, v in template_args.items()
                }
                rows.append({"tool": row["tool"], "args": args})
        else:
            args = {k: str(v).replace("{subjects}", joined) for k, v in template_args.items()}
            rows.append({"tool": row["tool"], "args": args})
    return rows


def gather_intel(
    subject_tokens: Sequence[str],
    detected_typologies: Sequence[str],
    clients: Sequence[McpClient],
    plan: dict | None = None,
    cap: int = DEFAULT_FINDING_CAP,
    now: datetime | None = None,
) -> IntelBatch:
    """Issue the per-typology query plan across all configured servers."""
    plan = plan if plan is not None else DEFAULT_QUERY_PLAN
    stamp = now or datetime.now(timezone.utc)
    if not clients:
        return IntelBatch(findings=(), diagnostics=("no intel sources configured",))

    rows: list[dict[str, Any]] = []
    for typology in list(detected_typologies) + (["*"] if detected_typologies else []):
        rows.extend(_expand_rows(plan, typology, subject_tokens))

    findings: list[IntelFinding] = []
    diagnostics: list[str] = []
    seen: set[tuple[str, str, str]] = set()
    for client in clients:
        server_id = client.config.server_id
        try:
            available = {d.name for d in client.discover_tools()}
        except SargenError as exc:
            diagnostics.append(f"{server_id}: {type(exc).__name__}: {exc}")
            continue
        for row in rows:
            tool = row["tool"]
            if tool not in available:
                continue
            args = row["args"]
            query = " ".join(str(v) for _, v in sorted(args.items()))
            try:
                result = client.invoke_tool(tool, args)
            except SargenError as exc:
                diagnostics.append(f"{server_id}/{tool}: {type(exc).__name__}: {exc}")
                continue
            for item in _items_from_result(result):
                content = item.get("content", "")
                digest = hashlib.sha256(content.encode("utf-8")).hexdigest()
                dedup_key = (server_id, tool, digest)
                if not content or dedup_key in seen:
                    continue
                seen.add(dedup_key)
                relevance = item.get("relevance")
                if relevance is None:
                    relevance = token_jaccard(query, content)
                findings.append(
                    IntelFinding(
                        finding_id=f"intel:{digest[:12]}",
                        server_id=server_id,
                        tool=tool,
                        query=query,
                        content=content,
                        relevance=float(relevance),
                        kind=item.get("kind", _TOOL_KIND_DEFAULTS.get(tool, "advisory")),
                        retrieved_at=stamp,
                    )
                )
    findings.sort(key=lambda f: (-f.relevance, f.finding_id))
    if not findings and not diagnostics:
        diagnostics.append("no intel findings matched the query plan")
    return IntelBatch(findings=tuple(findings[:cap]), diagnostics=tuple(diagnostics))


def _items_from_result(result: dict[str, Any]) -> list[dict[str, Any]]:
    items = result.get("items")
    if isinstance(items, list):
        return items
    # Fall back to plain text content blocks from servers that do not
    # return structured items.
    out = []
    for block in result.get("content", []):
        if block.get("type") == "text" and block.get("text") and block["text"] != "no results":
            out.append({"content": block["text"]})
    return out
