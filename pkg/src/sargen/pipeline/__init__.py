"""Planning agent and pipeline state machine."""

from .planner import AgentPlan, plan
from .runner import (
    FeedbackComment,
    FeedbackEdit,
    FeedbackItem,
    PipelineAborted,
    PipelineRun,
    apply_feedback,
    run_pipeline,
    seed_memory,
)
from .state import EVENTS, STAGES, START, TRANSITIONS, PipelineEvent, PipelineState, StageEntry

__all__ = [
    "EVENTS",
    "STAGES",
    "START",
    "TRANSITIONS",
    "AgentPlan",
    "FeedbackComment",
    "FeedbackEdit",
    "FeedbackItem",
    "PipelineAborted",
    "PipelineEvent",
    "PipelineRun",
    "PipelineState",
    "StageEntry",
    "apply_feedback",
    "plan",
    "run_pipeline",
    "seed_memory",
]
