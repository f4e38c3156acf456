"""Umbrella CLI: thin dispatch onto the module operations.

Exit codes: 0 success, 1 validation error (bad input/config), 2 internal
error. Subcommands map 1:1 onto module operations; no business logic
lives here.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config, mock_intel_server_entry
from .errors import SargenError, ValidationFailure


def _dump(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_text(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _enable_mock(config: dict) -> None:
    config["narrative"]["adapter"] = {"kind": "mock"}
    config["intel"]["servers"] = [mock_intel_server_entry()]


def _masked_context(config: dict, case_path: str):
    """Parse, vault, and mask a case the same way the pipeline does."""
    from .ingestion.parser import parse_alert
    from .privacy.masker import mask_case
    from .privacy.recognizer import build_recognizer
    from .privacy.vault import MaskingVault

    case = parse_alert(Path(case_path).read_bytes(), "json")
    vault = MaskingVault(case.case_id)
    recognizer = build_recognizer("rules", case)
    threshold = config.get("privacy", {}).get("mask_threshold", 0.5)
    masked = mask_case(case, vault, recognizer, threshold)
    return case, masked, vault, recognizer


def cmd_ingest(args, config) -> int:
    from .ingestion.parser import case_to_doc, parse_alert, read_csv_bundle

    if args.format == "csv":
        raw = read_csv_bundle(args.infile)
        case = parse_alert(raw, "csv-bundle")
    else:
        case = parse_alert(Path(args.infile).read_bytes(), "json")
    if args.check:
        print(f"{args.infile}: valid case {case.case_id!r} "
              f"({len(case.subjects)} subjects, {len(case.transactions)} transactions)")
        return 0
    _dump(case_to_doc(case), args.out)
    return 0


def cmd_guard(args, config) -> int:
    from .privacy.masker import mask, remask, unmask
    from .privacy.recognizer import build_recognizer
    from .privacy.vault import MaskingVault

    vault_path = Path(args.vault)
    if vault_path.exists():
        vault = MaskingVault.load(vault_path)
    else:
        vault = MaskingVault(args.case)
    if vault.case_id != args.case:
        raise ValidationFailure(
            f"vault belongs to case {vault.case_id!r}, not {args.case!r}"
        )
    text = _read_text(args.infile)
    if args.action == "unmask":
        _write_text(unmask(text, vault), args.out)
        return 0
    recognizer = build_recognizer("rules")
    if args.seed_case:
        from .ingestion.parser import parse_alert

        recognizer = build_recognizer("rules", parse_alert(Path(args.seed_case).read_bytes(), "json"))
    threshold = config.get("privacy", {}).get("mask_threshold", 0.5)
    op = mask if args.action == "mask" else remask
    result = op(text, vault, recognizer, threshold)
    vault.save(vault_path)
    _write_text(result.text, args.out)
    for warning in result.leak_audit:
        print(f"leak-audit: {warning}", file=sys.stderr)
    return 0


def cmd_typing(args, config) -> int:
    from .crimetype.model import classify

    _, masked, _, _ = _masked_context(config, args.case)
    crimetype_cfg = config["crimetype"]
    report = classify(
        masked, crimetype_cfg["registry"], crimetype_cfg["model"],
        crimetype_cfg.get("activation_threshold", 0.35),
    )
    _dump(report.to_doc(), args.out)
    return 0


def cmd_agents(args, config) -> int:
    from .agents.detectors import run_agent
    from .agents.findings import AGENT_IDS
    from .agents.linkgraph import link_accounts

    _, masked, _, _ = _masked_context(config, args.case)
    if args.agent == "linkgraph":
        _dump(link_accounts(masked).to_doc(), args.out)
        return 0
    agent_ids = AGENT_IDS if args.agent == "all" else (args.agent,)
    findings = []
    for agent_id in agent_ids:
        findings.extend(f.to_doc() for f in run_agent(agent_id, masked, config["agents"]))
    _dump({"case_id": masked.case_id, "findings": findings}, args.out)
    return 0


def cmd_memory(args, config) -> int:
    from .memory.store import MemoryStore, RetrievalQuery

    store = MemoryStore(args.store)
    if args.action == "put":
        if not (args.id and args.tier and args.content is not None):
            raise ValidationFailure("memory put requires --id, --tier, and --content")
        record = store.put(
            args.id, args.tier, args.key or args.id, args.content,
            set((args.tags or "").split(",")) - {""},
        )
        _dump({"id": record.id, "version": record.version}, None)
        return 0
    if args.action == "query":
        if not args.tier:
            raise ValidationFailure("memory query requires --tier")
        query = RetrievalQuery(
            tier=args.tier,
            tags=frozenset((args.tags or "").split(",")) - {""},
            text=args.text,
            k=args.k,
        )
        _dump(
            [{"record": r.to_doc(), "score": s} for r, s in store.query(query)],
            args.out,
        )
        return 0
    store.snapshot(args.out or "memory-snapshot.json")
    print(f"snapshot written to {args.out or 'memory-snapshot.json'}")
    return 0


def cmd_judge(args, config) -> int:
    from .agents.detectors import run_agent
    from .crimetype.model import classify
    from .judge.judge import judge
    from .memory.store import MemoryStore
    from .narrative.engine import NarrativeDraft
    from .pipeline.planner import plan
    from .pipeline.runner import seed_memory
    from datetime import datetime, timezone

    case, masked, vault, _ = _masked_context(config, args.case)
    draft = NarrativeDraft.from_doc(json.loads(Path(args.draft).read_text(encoding="utf-8")))
    crimetype_cfg = config["crimetype"]
    report = classify(masked, crimetype_cfg["registry"], crimetype_cfg["model"],
                      crimetype_cfg.get("activation_threshold", 0.35))
    agent_plan = plan(report, masked, config["pipeline"])
    findings = []
    for agent_id in agent_plan.agents_to_spawn:
        findings.extend(run_agent(agent_id, masked, config["agents"]))
    memory = MemoryStore(config.get("memory", {}).get("path"))
    seed_memory(memory, config.get("memory", {}).get("seed", []),
                datetime.now(timezone.utc))
    known = {e.token for e in vault.originals() if e.category == "PERSON"}
    result = judge(draft, masked, findings, report.detected, memory,
                   known_person_tokens=known)
    _dump(result.to_doc(), args.out)
    print(f"verdict: {result.verdict} ({len(result.flags)} flags)", file=sys.stderr)
    return 0


def cmd_eval(args, config) -> int:
    from .evaluation.runner import format_report, run_eval

    if args.mock:
        _enable_mock(config)
    weights = None
    if args.weights:
        weights = json.loads(Path(args.weights).read_text(encoding="utf-8"))
    report = run_eval(args.dataset, config, weights)
    _dump(report, args.out)
    print(format_report(report), file=sys.stderr)
    return 0


def cmd_run(args, config) -> int:
    from .pipeline.runner import run_pipeline

    if args.mock:
        _enable_mock(config)
    run = run_pipeline(Path(args.case).read_bytes(), config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    draft = run.draft()
    report = run.report()
    _dump(draft.to_doc(), str(out_dir / "draft.json"))
    _dump(draft.trace.to_doc(), str(out_dir / "trace.json"))
    _dump(report.to_doc(), str(out_dir / "judge_report.json"))
    _dump(run.render(run.state.draft_version).to_doc(), str(out_dir / "sar.json"))
    (out_dir / "event_log.jsonl").write_text(run.state.export_event_log(), encoding="utf-8")
    print(
        f"case {run.case.case_id}: stage={run.state.stage} draft=v{run.state.draft_version} "
        f"verdict={report.verdict} -> {out_dir}/"
    )
    return 0


def cmd_serve(args, config) -> int:
    import socket

    import uvicorn

    from .service.app import create_app

    if args.mock:
        _enable_mock(config)
    app = create_app(config, args.store)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((args.host, args.port))
    sock.listen(128)
    print(f"sargen service listening on http://{args.host}:{sock.getsockname()[1]}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sargen", description="AML SAR drafting pipeline")
    parser.add_argument("--config", help="JSON config overlay", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate a raw alert")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default="-")
    p.add_argument("--check", action="store_true", help="validate only")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("guard", help="mask/unmask text against a case vault")
    p.add_argument("action", choices=["mask", "unmask", "remask"])
    p.add_argument("--case", required=True, help="case id the vault belongs to")
    p.add_argument("--vault", required=True, help="vault JSON path (created if absent)")
    p.add_argument("--in", dest="infile", default="-")
    p.add_argument("--out", default="-")
    p.add_argument("--seed-case", default=None, help="case file to seed the dictionary from")
    p.set_defaults(func=cmd_guard)

    p = sub.add_parser("typing", help="crime typology classification")
    p.add_argument("action", choices=["classify"])
    p.add_argument("--case", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_typing)

    p = sub.add_parser("agents", help="run typology detection agents")
    p.add_argument("action", choices=["run"])
    p.add_argument("--case", required=True)
    p.add_argument("--agent", default="all", help="agent id, 'all', or 'linkgraph'")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_agents)

    p = sub.add_parser("memory", help="memory store operations")
    p.add_argument("action", choices=["put", "query", "export"])
    p.add_argument("--store", required=True)
    p.add_argument("--id")
    p.add_argument("--tier")
    p.add_argument("--key")
    p.add_argument("--content")
    p.add_argument("--tags")
    p.add_argument("--text")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("judge", help="validate a draft against a case")
    p.add_argument("--draft", required=True)
    p.add_argument("--case", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("eval", help="score drafts against a golden dataset")
    p.add_argument("action", choices=["run"])
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", default=None)
    p.add_argument("--out", default="-")
    p.add_argument("--mock", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="full pipeline over one case file")
    p.add_argument("--case", required=True)
    p.add_argument("--mock", action="store_true", help="mock adapter + bundled mock MCP")
    p.add_argument("--out-dir", default="sargen-out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--store", default="sargen-cases.log")
    p.add_argument("--mock", action="store_true")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SargenError as exc:
        from .pipeline.runner import PipelineAborted

        if isinstance(exc, PipelineAborted) and isinstance(exc.cause, ValidationFailure):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
