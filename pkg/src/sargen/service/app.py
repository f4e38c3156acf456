"""HTTP service wrapping the pipeline for the review UI and API clients.

Long-running work is asynchronous: POST run returns 202 and clients poll
GET state. The only endpoint that resolves mask tokens is GET draft; every
other response stays inside the masked domain.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse

from ..config import load_config
from ..errors import SargenError, StaleVersion, ValidationFailure
from ..pipeline.runner import (
    FeedbackItem,
    PipelineAborted,
    PipelineRun,
    apply_feedback,
    run_pipeline,
)
from ..pipeline.state import PipelineState
from .schemas import (
    CaseCreatedResponse,
    DraftResponse,
    ErrorEnvelope,
    FeedbackAcceptedResponse,
    FeedbackRequest,
    HealthResponse,
    ReportResponse,
    RunAcceptedResponse,
    StateResponse,
    TraceResponse,
)
from .store import CaseCommandLog


class CaseSession:
    def __init__(self, case_id: str, raw: bytes) -> None:
        self.case_id = case_id
        self.raw = raw
        self.run: PipelineRun | None = None
        self.failed_state: PipelineState | None = None
        self.thread: threading.Thread | None = None
        self.lock = threading.Lock()

    @property
    def running(self) -> bool:
        return self.thread is not None and self.thread.is_alive()

    def state_doc(self) -> dict[str, Any]:
        if self.run is not None:
            return self.run.state.to_doc()
        if self.failed_state is not None:
            return self.failed_state.to_doc()
        return PipelineState(case_id=self.case_id).to_doc()


class CaseService:
    """Owns sessions, persistence, and recovery; the app routes into it."""

    def __init__(self, config: dict[str, Any], store_path: str | Path) -> None:
        self.config = config
        self.store = CaseCommandLog(store_path)
        self.sessions: dict[str, CaseSession] = {}
        self._lock = threading.Lock()
        self._recover()

    def _recover(self) -> None:
        for case_id, entry in self.store.replay().items():
            if entry["raw"] is None:
                continue
            session = CaseSession(case_id, entry["raw"])
            self.sessions[case_id] = session
            if not entry["run_requested"]:
                continue
            try:
                run = run_pipeline(entry["raw"], self.config)
                for item_doc in entry["feedback"]:
                    apply_feedback(run, FeedbackItem.from_doc(item_doc))
                session.run = run
                run.state.diagnostics.append("state rebuilt from command log after restart")
            except PipelineAborted as exc:
                session.failed_state = exc.state
            except SargenError as exc:
                session.failed_state = PipelineState(case_id=case_id)
                session.failed_state.diagnostics.append(f"recovery failed: {exc}")

    # --- operations ------------------------------------------------------

    def create_case(self, raw: bytes) -> str:
        from ..ingestion.parser import parse_alert

        case = parse_alert(raw, "json")  # rejects before anything persists
        with self._lock:
            if case.case_id in self.sessions:
                raise ValidationFailure(f"case {case.case_id!r} already exists")
            self.store.case_created(case.case_id, raw)
            self.sessions[case.case_id] = CaseSession(case.case_id, raw)
        return case.case_id

    def session(self, case_id: str) -> CaseSession:
        session = self.sessions.get(case_id)
        if session is None:
            raise KeyError(case_id)
        return session

    def start_run(self, case_id: str) -> str:
        session = self.session(case_id)
        with session.lock:
            if session.running:
                return session.state_doc()["stage"]
            if session.run is not None:  # idempotent re-run request
                return session.run.state.stage
            self.store.run_requested(case_id)

            def work() -> None:
                try:
                    session.run = run_pipeline(session.raw, self.config)
                except PipelineAborted as exc:
                    session.failed_state = exc.state
                except SargenError as exc:
                    state = PipelineState(case_id=case_id)
                    state.diagnostics.append(f"run failed: {exc}")
                    session.failed_state = state

            session.thread = threading.Thread(target=work, daemon=True)
            session.thread.start()
        return "running"

    def wait(self, case_id: str, timeout_s: float = 30.0) -> None:
        session = self.session(case_id)
        if session.thread is not None:
            session.thread.join(timeout_s)

    def feedback(self, case_id: str, item: FeedbackItem, item_doc: dict[str, Any]) -> PipelineState:
        session = self.session(case_id)
        if session.run is None:
            raise ValidationFailure("case has not produced a draft yet")
        state = apply_feedback(session.run, item)
        self.store.feedback_applied(case_id, item_doc)
        return state


def create_app(config: dict[str, Any] | None = None,
               store_path: str | Path | None = None) -> FastAPI:
    config = config or load_config()
    store_path = store_path or os.environ.get("SARGEN_STORE", "sargen-cases.log")
    service = CaseService(config, store_path)
    token_env = config.get("service", {}).get("token_env", "SARGEN_API_TOKEN")

    app = FastAPI(title="sargen", version="0.1.0")
    app.state.service = service

    async def require_auth(request: Request) -> None:
        expected = os.environ.get(token_env)
        if not expected:
            return  # development mode: no token configured
        header = request.headers.get("authorization", "")
        if header != f"Bearer {expected}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    def envelope(code: str, message: str, status: int, details: dict | None = None) -> JSONResponse:
        body = ErrorEnvelope(code=code, message=message, details=details or {})
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.exception_handler(SargenError)
    async def sargen_error_handler(request: Request, exc: SargenError) -> JSONResponse:
        if isinstance(exc, StaleVersion):
            return envelope("StaleVersion", str(exc), 409)
        if isinstance(exc, ValidationFailure):
            return envelope(type(exc).__name__, str(exc), 422)
        return envelope(type(exc).__name__, str(exc), 500)

    @app.exception_handler(KeyError)
    async def missing_case_handler(request: Request, exc: KeyError) -> JSONResponse:
        return envelope("NotFound", f"unknown case {exc.args[0]!r}", 404)

    @app.get("/healthz", response_model=HealthResponse)
    async def healthz() -> HealthResponse:
        return HealthResponse(status="ok", cases=len(service.sessions))

    @app.post("/cases", response_model=CaseCreatedResponse, status_code=201,
              dependencies=[Depends(require_auth)])
    async def create_case(request: Request) -> CaseCreatedResponse:
        raw = await request.body()
        return CaseCreatedResponse(case_id=service.create_case(raw))

    @app.post("/cases/{case_id}/run", response_model=RunAcceptedResponse, status_code=202,
              dependencies=[Depends(require_auth)])
    async def run_case(case_id: str) -> RunAcceptedResponse:
        stage = service.start_run(case_id)
        return RunAcceptedResponse(case_id=case_id, stage=stage)

    @app.get("/cases/{case_id}/state", response_model=StateResponse,
             dependencies=[Depends(require_auth)])
    async def get_state(case_id: str) -> StateResponse:
        return StateResponse(**service.session(case_id).state_doc())

    @app.get("/cases/{case_id}/draft", response_model=DraftResponse,
             dependencies=[Depends(require_auth)])
    async def get_draft(case_id: str, version: int | None = Query(default=None)) -> DraftResponse:
        session = service.session(case_id)
        run = session.run
        if run is None:
            raise ValidationFailure("no draft generated yet")
        draft = run.draft(version)
        if draft is None:
            raise KeyError(case_id)
        report = run.report(draft.draft_version)
        # Unmasked render happens here, inside the trust boundary.
        sar = run.render(draft.draft_version).to_doc()
        return DraftResponse(
            case_id=case_id,
            draft_version=draft.draft_version,
            verdict=report.verdict if report else "pass",
            sar=sar,
            flags=[f.to_doc() for f in (report.flags if report else ())],
        )

    @app.get("/cases/{case_id}/trace", response_model=TraceResponse,
             dependencies=[Depends(require_auth)])
    async def get_trace(case_id: str, version: int | None = Query(default=None)) -> TraceResponse:
        run = service.session(case_id).run
        if run is None:
            raise ValidationFailure("no trace available yet")
        draft = run.draft(version)
        if draft is None:
            raise KeyError(case_id)
        return TraceResponse(
            case_id=case_id, draft_version=draft.draft_version, trace=draft.trace.to_doc()
        )

    @app.post("/cases/{case_id}/feedback", response_model=FeedbackAcceptedResponse,
              status_code=202, dependencies=[Depends(require_auth)])
    async def post_feedback(case_id: str, body: FeedbackRequest) -> FeedbackAcceptedResponse:
        item_doc = body.model_dump()
        item = FeedbackItem.from_doc(item_doc)
        state = service.feedback(case_id, item, item_doc)
        return FeedbackAcceptedResponse(
            case_id=case_id, stage=state.stage, draft_version=state.draft_version
        )

    @app.get("/cases/{case_id}/report", response_model=ReportResponse,
             dependencies=[Depends(require_auth)])
    async def get_report(case_id: str) -> ReportResponse:
        run = service.session(case_id).run
        if run is None or run.report() is None:
            raise ValidationFailure("no judge report available yet")
        return ReportResponse(case_id=case_id, report=run.report().to_doc())

    return app
