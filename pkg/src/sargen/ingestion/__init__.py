"""Case ingestion: parse raw alert bundles into validated, immutable CaseFiles."""

from .model import (
    AccountEvent,
    AccountRecord,
    AlertMeta,
    CaseFile,
    Communication,
    GeoPoint,
    RiskSignal,
    SubjectProfile,
    Transaction,
    format_major,
    to_minor_units,
)
from .parser import (
    build_case,
    case_to_doc,
    parse_alert,
    read_csv_bundle,
    serialize_case,
)
from .summary import StructuredSummary, summarize_case

__all__ = [
    "AccountEvent",
    "AccountRecord",
    "AlertMeta",
    "CaseFile",
    "Communication",
    "GeoPoint",
    "RiskSignal",
    "StructuredSummary",
    "SubjectProfile",
    "Transaction",
    "build_case",
    "case_to_doc",
    "format_major",
    "parse_alert",
    "read_csv_bundle",
    "serialize_case",
    "summarize_case",
    "to_minor_units",
]
