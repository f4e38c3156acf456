"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class ErrorEnvelope(BaseModel):
    code: str
    message: str
    details: dict[str, Any] = Field(default_factory=dict)


class CaseCreatedResponse(BaseModel):
    case_id: str


class RunAcceptedResponse(BaseModel):
    case_id: str
    stage: str


class StateResponse(BaseModel):
    case_id: str
    stage: str
    stage_history: list[dict[str, Any]]
    artifacts: dict[str, str]
    diagnostics: list[str]
    draft_version: int
    regen_cycles: int
    failed_stage: str | None = None
    error: str | None = None


class DraftResponse(BaseModel):
    case_id: str
    draft_version: int
    verdict: str
    sar: dict[str, Any]  # unmasked investigator-facing document
    flags: list[dict[str, Any]]


class TraceResponse(BaseModel):
    case_id: str
    draft_version: int
    trace: dict[str, Any]  # masked: tokens only, no vault originals


class FeedbackEditModel(BaseModel):
    section: str
    old_text: str = ""
    new_text: str


class FeedbackCommentModel(BaseModel):
    location: str = "general"
    text: str


class FeedbackRequest(BaseModel):
    draft_version: int
    disposition: str  # approve | request_regeneration
    edits: list[FeedbackEditModel] = Field(default_factory=list)
    comments: list[FeedbackCommentModel] = Field(default_factory=list)


class FeedbackAcceptedResponse(BaseModel):
    case_id: str
    stage: str
    draft_version: int


class ReportResponse(BaseModel):
    case_id: str
    report: dict[str, Any]


class HealthResponse(BaseModel):
    status: str
    cases: int
