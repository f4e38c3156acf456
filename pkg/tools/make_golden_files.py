#!/usr/bin/env python3
"""Freeze byte-exact golden artifacts for regression tests.

Rerun after any intentional change to prompt assembly, the mock adapter
template, the renderer, or the MCP client wire encoding; tests compare
against these files byte for byte.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sargen.config import load_config, mock_intel_server_entry  # noqa: E402
from sargen.intel.client import McpClient, ServerConfig  # noqa: E402
from sargen.pipeline.runner import run_pipeline  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "fixtures" / "golden"


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    config = load_config()
    config["intel"]["servers"] = [mock_intel_server_entry()]
    raw = (ROOT / "fixtures" / "case_01.json").read_bytes()
    run = run_pipeline(raw, config)
    assert run.report().verdict == "pass"

    (GOLDEN / "prompt_case_01.txt").write_text(run.prompts[1], encoding="utf-8")
    (GOLDEN / "draft_case_01.json").write_text(
        json.dumps(run.draft().to_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (GOLDEN / "judge_report_case_01.json").write_text(
        json.dumps(run.report().to_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (GOLDEN / "sar_case_01.json").write_text(
        json.dumps(run.render(1).to_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    # MCP wire bytes: scripted discovery + one invocation over stdio.
    client = McpClient(
        ServerConfig.from_doc(mock_intel_server_entry()), timeout_s=10.0
    )
    client.discover_tools()
    client.invoke_tool("sanctions_lookup", {"name": "[[PERSON_1]]"})
    client.close()
    wire = b"\n".join(client.sent_payloads) + b"\n"
    (GOLDEN / "mcp_stdio_wire.jsonl").write_bytes(wire)
    print(f"golden files written under {GOLDEN}")


if __name__ == "__main__":
    main()
