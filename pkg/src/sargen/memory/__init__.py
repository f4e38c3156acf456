"""Persistent three-tier dynamic memory."""

from .store import TIERS, MemoryRecord, MemoryStore, RetrievalQuery, token_jaccard, tokenize

__all__ = ["TIERS", "MemoryRecord", "MemoryStore", "RetrievalQuery", "token_jaccard", "tokenize"]
