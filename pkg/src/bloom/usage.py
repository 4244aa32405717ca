"""App-usage event log: screen visits and session start/end with durations."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .errors import ValidationError


class UsageKind(str, Enum):
    SCREEN_VISIT = "screenVisit"
    SESSION_START = "sessionStart"
    SESSION_END = "sessionEnd"


class Screen(str, Enum):
    TODAY = "today"
    PLAN = "plan"
    INSIGHTS = "insights"
    CHAT = "chat"


@dataclass(frozen=True)
class UsageEvent:
    user_id: str
    kind: UsageKind
    timestamp: datetime
    screen: Optional[Screen] = None
    duration_sec: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "userId": self.user_id,
            "kind": self.kind.value,
            "timestamp": self.timestamp.isoformat(),
            "screen": self.screen.value if self.screen else None,
            "durationSec": self.duration_sec,
        }


def parse_usage_event(data: dict) -> UsageEvent:
    try:
        kind = UsageKind(data["kind"])
        timestamp = datetime.fromisoformat(data["timestamp"])
        user_id = str(data["userId"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed usage event: {exc}") from exc
    screen = None
    if data.get("screen") is not None:
        try:
            screen = Screen(data["screen"])
        except ValueError:
            raise ValidationError(f"unknown screen: {data['screen']!r}") from None
    duration = data.get("durationSec")
    if duration is not None:
        duration = float(duration)
        if duration < 0:
            raise ValidationError("durationSec must be >= 0")
    # Durations only make sense on closing events.
    if duration is not None and kind is UsageKind.SESSION_START:
        raise ValidationError("sessionStart events carry no duration")
    if kind is UsageKind.SCREEN_VISIT and screen is None:
        raise ValidationError("screenVisit events require a screen")
    return UsageEvent(user_id, kind, timestamp, screen, duration)


def aggregate_daily_screen_seconds(events: List[UsageEvent]) -> Dict[Tuple[date, str], float]:
    """Per-day, per-screen total visit seconds across screenVisit events."""
    totals: Dict[Tuple[date, str], float] = {}
    for event in events:
        if event.kind is not UsageKind.SCREEN_VISIT or event.screen is None:
            continue
        key = (event.timestamp.date(), event.screen.value)
        totals[key] = totals.get(key, 0.0) + (event.duration_sec or 0.0)
    return totals
