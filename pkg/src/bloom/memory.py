"""Summary-based conversation memory.

Each ended session leaves one timestamped summary; the chronological list is
prepended to every later conversation's context. When the concatenation would
exceed the token budget the oldest summaries are dropped first, and every
truncation leaves an audit record.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Dict, List

DEFAULT_TOKEN_BUDGET = 3500


def estimate_tokens(text: str) -> int:
    # Rough chars/4 heuristic; only used to bound the memory block.
    return len(text) // 4 + 1


@dataclass(frozen=True)
class MemorySummary:
    timestamp: datetime
    session_id: str
    text: str

    def render(self) -> str:
        return f"[{self.timestamp.isoformat()}] {self.text}"


@dataclass
class TruncationAudit:
    user_id: str
    dropped_session_ids: List[str]
    budget: int


class MemoryStore:
    """Per-user chronological summaries with budget-bounded rendering."""

    def __init__(self, token_budget: int = DEFAULT_TOKEN_BUDGET):
        self.token_budget = token_budget
        self._summaries: Dict[str, List[MemorySummary]] = {}
        self.truncation_audits: List[TruncationAudit] = []

    def add(self, user_id: str, summary: MemorySummary) -> None:
        entries = self._summaries.setdefault(user_id, [])
        if any(s.session_id == summary.session_id for s in entries):
            raise ValueError(f"session {summary.session_id!r} already summarized")
        entries.append(summary)
        entries.sort(key=lambda s: s.timestamp)

    def for_user(self, user_id: str) -> List[MemorySummary]:
        return list(self._summaries.get(user_id, []))

    def within_budget(self, user_id: str) -> List[MemorySummary]:
        """Newest-preserving slice that fits the token budget; audits drops."""
        entries = self.for_user(user_id)
        kept = list(entries)
        dropped: List[str] = []
        while kept and sum(estimate_tokens(s.render()) for s in kept) > self.token_budget:
            dropped.append(kept.pop(0).session_id)
        if dropped:
            self.truncation_audits.append(
                TruncationAudit(user_id, dropped, self.token_budget))
        return kept

    def render_block(self, user_id: str) -> str:
        kept = self.within_budget(user_id)
        if not kept:
            return ""
        lines = "\n".join(s.render() for s in kept)
        return f"Memory of past conversations:\n{lines}"
