"""FastAPI service exposing the pipeline to the review UI and API clients."""

from .app import CaseService, create_app
from .store import CaseCommandLog

__all__ = ["CaseCommandLog", "CaseService", "create_app"]
