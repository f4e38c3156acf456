"""Pluggable language-model adapters.

The bundled mock adapter is a deterministic template filler over the
prompt's machine-readable sections: byte-reproducible at temperature 0
with a fixed seed, and instrumented so tests can scan every payload that
crossed the trust boundary. A thin HTTP gateway adapter covers live
deployments behind the same interface.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Any, Protocol

import httpx

from ..errors import AdapterFailure

SECTION_ORDER = ("who", "what", "when", "where", "how", "why", "supporting_information")


@dataclass(frozen=True)
class GenerationParams:
    max_length: int = 20000
    temperature: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class AdapterCapabilities:
    max_prompt_chars: int
    deterministic: bool


class LlmAdapter(Protocol):
    adapter_id: str
    capabilities: AdapterCapabilities

    def generate(self, prompt: str, params: GenerationParams) -> tuple[str, dict[str, Any]]: ...


_PROMPT_LINE = re.compile(r"^- \[(?P<id>[^\]]+)\] \((?P<meta>[^)]*)\) (?P<text>.*)$")
_TYPOLOGY_LINE = re.compile(
    r"^- (?P<name>\w+) p=(?P<p>[0-9.]+) rank=(?P<rank>\d+) indicators: ?(?P<inds>.*)$"
)
_FEEDBACK_LINE = re.compile(r"^- (?P<kind>comment|edit) (?P<section>\w+): (?P<text>.*)$")
_SUMMARY_KV = re.compile(r"^(?P<key>[a-z_ ]+): (?P<value>.*)$")


def _parse_prompt_blocks(prompt: str) -> dict[str, list[str]]:
    blocks: dict[str, list[str]] = {}
    current: str | None = None
    for line in prompt.splitlines():
        if line.startswith("# "):
            current = line[2:].strip()
            blocks[current] = []
        elif current is not None and line.strip():
            blocks[current].append(line)
    return blocks


@dataclass
class MockAdapter:
    """Deterministic stand-in for a hosted model; see module docstring."""

    adapter_id: str = "mock"
    capabilities: AdapterCapabilities = field(
        default_factory=lambda: AdapterCapabilities(max_prompt_chars=60000, deterministic=True)
    )
    calls: list[str] = field(default_factory=list)  # captured prompts, for leak scans

    def generate(self, prompt: str, params: GenerationParams) -> tuple[str, dict[str, Any]]:
        self.calls.append(prompt)
        blocks = _parse_prompt_blocks(prompt)
        summary = self._kv(blocks.get("CASE SUMMARY", []))
        findings = [m.groupdict() for m in map(_PROMPT_LINE.match, blocks.get("FINDINGS", [])) if m]
        typologies = [
            m.groupdict() for m in map(_TYPOLOGY_LINE.match, blocks.get("TYPOLOGIES", [])) if m
        ]
        intel = [m.groupdict() for m in map(_PROMPT_LINE.match, blocks.get("INTEL", [])) if m]
        memory = [m.groupdict() for m in map(_PROMPT_LINE.match, blocks.get("MEMORY", [])) if m]
        feedback = [
            m.groupdict() for m in map(_FEEDBACK_LINE.match, blocks.get("FEEDBACK", [])) if m
        ]
        sections = self._compose(summary, findings, typologies, intel, memory)
        for item in feedback:
            section = item["section"] if item["section"] in sections else "supporting_information"
            if item["kind"] == "edit":
                sections[section] = [f"{item['text']} [contextual]"]
            else:
                sections[section].append(
                    f"Investigator guidance incorporated: {item['text']} [contextual]"
                )
        out = []
        for name in SECTION_ORDER:
            out.append(f"## SECTION {name}")
            out.extend(sections[name])
        text = "\n".join(out)
        usage = {"prompt_chars": len(prompt), "output_chars": len(text), "adapter": self.adapter_id}
        return text, usage

    @staticmethod
    def _kv(lines: list[str]) -> dict[str, str]:
        out = {}
        for line in lines:
            m = _SUMMARY_KV.match(line)
            if m:
                out[m.group("key").strip()] = m.group("value").strip()
        return out

    def _compose(
        self,
        summary: dict[str, str],
        findings: list[dict[str, str]],
        typologies: list[dict[str, str]],
        intel: list[dict[str, str]],
        memory: list[dict[str, str]],
    ) -> dict[str, list[str]]:
        subjects = summary.get("subjects", "the account holder")
        accounts = summary.get("accounts", "the referenced accounts")
        window = summary.get("activity window", "the review period")
        credits = summary.get("total credits", "")
        debits = summary.get("total debits", "")
        txn_count = summary.get("transaction count", "multiple")
        detected = [t for t in typologies if t.get("name")]
        primary = detected[0]["name"].replace("_", " ") if detected else "suspicious activity"

        sanctions = [i for i in intel if "sanctions_hit" in i["meta"]]
        news = [i for i in intel if "sanctions_hit" not in i["meta"]]

        who = [
            f"This report concerns {subjects}, holder of {accounts}. [contextual]",
        ]
        if sanctions:
            refs = ",".join(i["id"] for i in sanctions)
            who.append(f"Screening surfaced a watchlist reference for the subject. [refs: {refs}]")

        what = []
        if credits:
            what.append(f"Credits totaling {credits} were received during the review window. [contextual]")
        if debits:
            what.append(f"Debits totaling {debits} left the account over the same window. [contextual]")
        what.append(f"In all, {txn_count} transactions were reviewed. [contextual]")
        for f in findings:
            what.append(f"Analysis determined: {f['text']}. [refs: {f['id']}]")

        when = [f"The activity spans {window}. [contextual]"]
        velocity_findings = [f for f in findings if f["id"].startswith("velocity:")]
        for f in velocity_findings:
            when.append(f"Concentrated bursts were observed: {f['text']}. [refs: {f['id']}]")

        where = []
        country_findings = [f for f in findings if f["id"].startswith("country_risk:")]
        geo_findings = [f for f in findings if f["id"].startswith("geo_anomaly:")]
        for f in country_findings:
            where.append(f"Jurisdictional exposure: {f['text']}. [refs: {f['id']}]")
        for f in geo_findings:
            where.append(f"Location inconsistency: {f['text']}. [refs: {f['id']}]")
        if not where:
            where.append("The activity was conducted through remote channels with no fixed location pattern. [contextual]")

        how = []
        mech = [f for f in findings if f["id"].startswith(("txn_fraud:", "account_health:", "dispute_pattern:"))]
        for f in mech:
            how.append(f"Mechanism: {f['text']}. [refs: {f['id']}]")
        if not how:
            how.append("The mechanism of movement follows ordinary payment rails without a distinct manipulation pattern. [contextual]")

        why = []
        for t in detected:
            inds = [s.strip() for s in t.get("inds", "").split(",") if s.strip()]
            label = t["name"].replace("_", " ")
            if inds:
                refs = ",".join(f"indicator:{i}" for i in inds)
                why.append(
                    f"The combined pattern is consistent with {label} (model probability {t['p']}). [refs: {refs}]"
                )
            else:
                why.append(f"The combined pattern is consistent with {label} (model probability {t['p']}). [contextual]")
        if not why:
            why.append("No typology reached the activation threshold; the filing is precautionary. [contextual]")

        supporting = []
        for i in news:
            supporting.append(f"External intelligence: {i['text']} [refs: {i['id']}]")
        for m in memory:
            supporting.append(f"Reference guidance consulted: {m['text']} [refs: {m['id']}]")
        supporting.append(
            "Transaction logs, account event histories, and communications excerpts are retained as supporting documentation. [contextual]"
        )

        return {
            "who": who,
            "what": what,
            "when": when,
            "where": where,
            "how": how,
            "why": why,
            "supporting_information": supporting,
        }


@dataclass
class HttpGatewayAdapter:
    """POSTs the prompt to an internal LLM gateway; key comes from the environment."""

    endpoint: str
    adapter_id: str = "http-gateway"
    api_key_env: str = "SARGEN_LLM_API_KEY"
    timeout_s: float = 60.0
    capabilities: AdapterCapabilities = field(
        default_factory=lambda: AdapterCapabilities(max_prompt_chars=120000, deterministic=False)
    )

    def generate(self, prompt: str, params: GenerationParams) -> tuple[str, dict[str, Any]]:
        headers = {}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["authorization"] = f"Bearer {key}"
        try:
            response = httpx.post(
                self.endpoint,
                json={
                    "prompt": prompt,
                    "max_length": params.max_length,
                    "temperature": params.temperature,
                    "seed": params.seed,
                },
                headers=headers,
                timeout=self.timeout_s,
            )
            response.raise_for_status()
            body = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise AdapterFailure(f"gateway call failed: {exc}") from exc
        if "text" not in body:
            raise AdapterFailure("gateway response missing 'text'")
        return body["text"], body.get("usage", {})


def build_adapter(spec: dict[str, Any]) -> LlmAdapter:
    kind = spec.get("kind", "mock")
    if kind == "mock":
        return MockAdapter()
    if kind == "http-gateway":
        return HttpGatewayAdapter(endpoint=spec["endpoint"])
    raise AdapterFailure(f"unknown adapter kind {kind!r}")
