"""Wearable sample ingestion and aggregation queries.

Samples are deduplicated by (sourceId, kind, start) so re-sent batches are
idempotent. Aggregation buckets are calendar-aligned in the user's local
time: day queries return a single total for the date, week queries return
seven daily buckets from Monday, month queries return one bucket per calendar
day. Heart rate aggregates as a mean; every other kind sums.

All timestamps in this module are naive user-local datetimes. Incoming ISO
strings carrying a UTC offset are converted with the store's timezone before
the offset is dropped, which keeps calendar-day buckets correct across DST
transitions (23h/25h days are just days).
"""

from __future__ import annotations

import calendar
import threading
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from enum import Enum
from typing import Dict, List, Optional, Tuple
from zoneinfo import ZoneInfo

from .errors import ReferenceDateError, ValidationError
from .plan import week_start_for

DEFAULT_TIMEZONE = "UTC"


class SampleKind(str, Enum):
    STEP_COUNT = "stepCount"
    ACTIVE_ENERGY_BURNED = "activeEnergyBurned"
    EXERCISE_TIME = "exerciseTime"
    DISTANCE_WALKING_RUNNING = "distanceWalkingRunning"
    HEART_RATE = "heartRate"
    WORKOUT = "workout"


UNITS = {
    SampleKind.STEP_COUNT: "steps",
    SampleKind.ACTIVE_ENERGY_BURNED: "kcal",
    SampleKind.EXERCISE_TIME: "min",
    SampleKind.DISTANCE_WALKING_RUNNING: "km",
    SampleKind.HEART_RATE: "bpm",
    SampleKind.WORKOUT: "min",
}

# Mean for point-in-time vitals, sum for cumulative quantities.
MEAN_KINDS = {SampleKind.HEART_RATE}


class AggregationLevel(str, Enum):
    DAY = "day"
    WEEK = "week"
    MONTH = "month"


@dataclass(frozen=True)
class HealthSample:
    kind: SampleKind
    value: float
    start: datetime
    end: datetime
    source_id: str
    # Workout samples carry the activity name so records can link to plans.
    activity: Optional[str] = None

    @property
    def unit(self) -> str:
        return UNITS[self.kind]


@dataclass
class AggregationQuery:
    sample_type: SampleKind
    reference_date: date
    aggregation_level: AggregationLevel = AggregationLevel.MONTH
    show_user: bool = False


@dataclass
class Bucket:
    period_start: date
    value: float


@dataclass
class AggregateResult:
    sample_type: SampleKind
    aggregation_level: AggregationLevel
    buckets: List[Bucket]
    description: str
    show_user: bool

    def total(self) -> float:
        return sum(b.value for b in self.buckets)

    def to_dict(self) -> dict:
        return {
            "sampleType": self.sample_type.value,
            "aggregationLevel": self.aggregation_level.value,
            "buckets": [{"periodStart": b.period_start.isoformat(), "value": b.value} for b in self.buckets],
            "description": self.description,
            "showUser": self.show_user,
        }


@dataclass
class IngestReport:
    accepted: int = 0
    duplicates: int = 0
    rejected: List[Tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "rejected": [{"index": i, "reason": r} for i, r in self.rejected],
        }


def _localize(dt: datetime, tz: ZoneInfo) -> datetime:
    if dt.tzinfo is None:
        return dt
    return dt.astimezone(tz).replace(tzinfo=None)


def parse_sample(data: dict, tz: ZoneInfo) -> HealthSample:
    """Validate one sample object from a JSON batch; raises ValidationError."""
    if not isinstance(data, dict):
        raise ValidationError("sample must be an object")
    try:
        kind = SampleKind(data["kind"])
    except (KeyError, ValueError):
        raise ValidationError(f"unknown sample kind: {data.get('kind')!r}") from None
    try:
        value = float(data["value"])
        start = _localize(datetime.fromisoformat(data["start"]), tz)
        end = _localize(datetime.fromisoformat(data["end"]), tz)
        source_id = str(data["sourceId"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed sample: {exc}") from exc
    if end < start:
        raise ValidationError("end must not precede start")
    if kind is SampleKind.HEART_RATE:
        if value <= 0:
            raise ValidationError("heartRate must be > 0")
    elif value < 0:
        raise ValidationError("value must be >= 0")
    activity = data.get("activity")
    if kind is SampleKind.WORKOUT and not activity:
        raise ValidationError("workout samples require an activity name")
    return HealthSample(kind, value, start, end, source_id, activity)


class HealthStore:
    """Concurrent-safe in-memory sample store keyed by user.

    Ingestion and queries share one lock per call, so queries always see a
    consistent snapshot and never observe a partially applied batch.
    """

    def __init__(self, timezone: str = DEFAULT_TIMEZONE):
        self.tz = ZoneInfo(timezone)
        self._samples: Dict[str, Dict[tuple, HealthSample]] = {}
        self._lock = threading.Lock()

    def ingest(self, user_id: str, batch: List[dict]) -> IngestReport:
        report = IngestReport()
        parsed: List[HealthSample] = []
        for index, item in enumerate(batch):
            try:
                parsed.append(parse_sample(item, self.tz))
            except ValidationError as exc:
                report.rejected.append((index, str(exc)))
        with self._lock:
            store = self._samples.setdefault(user_id, {})
            for sample in parsed:
                key = (sample.source_id, sample.kind, sample.start)
                if key in store:
                    report.duplicates += 1
                else:
                    store[key] = sample
                    report.accepted += 1
        return report

    def samples_for(self, user_id: str, kind: Optional[SampleKind] = None) -> List[HealthSample]:
        with self._lock:
            samples = list(self._samples.get(user_id, {}).values())
        if kind is not None:
            samples = [s for s in samples if s.kind is kind]
        return sorted(samples, key=lambda s: (s.start, s.source_id))

    def snapshot(self, user_id: str) -> List[dict]:
        return [
            {
                "kind": s.kind.value,
                "value": s.value,
                "start": s.start.isoformat(),
                "end": s.end.isoformat(),
                "sourceId": s.source_id,
                **({"activity": s.activity} if s.activity else {}),
            }
            for s in self.samples_for(user_id)
        ]


def _bucket_days(q: AggregationQuery) -> List[date]:
    if q.aggregation_level is AggregationLevel.DAY:
        return [q.reference_date]
    if q.aggregation_level is AggregationLevel.WEEK:
        monday = week_start_for(q.reference_date)
        return [monday + timedelta(days=i) for i in range(7)]
    first = q.reference_date.replace(day=1)
    days_in_month = calendar.monthrange(first.year, first.month)[1]
    return [first + timedelta(days=i) for i in range(days_in_month)]


def query_health_data(store: HealthStore, user_id: str, q: AggregationQuery) -> AggregateResult:
    """Aggregate one sample kind over calendar buckets; empty buckets are zeros."""
    days = _bucket_days(q)
    samples = store.samples_for(user_id, q.sample_type)
    per_day: Dict[date, List[float]] = {d: [] for d in days}
    for s in samples:
        day = s.start.date()
        if day in per_day:
            per_day[day].append(s.value)
    buckets = []
    for d in days:
        values = per_day[d]
        if q.sample_type in MEAN_KINDS:
            value = sum(values) / len(values) if values else 0.0
        else:
            value = float(sum(values))
        buckets.append(Bucket(d, value))
    unit = UNITS[q.sample_type]
    how = "average" if q.sample_type in MEAN_KINDS else "total"
    description = (
        f"{q.sample_type.value} ({unit}), {how} per day for the "
        f"{q.aggregation_level.value} of {days[0].isoformat()}, "
        f"from wearable samples recorded on the user's device"
    )
    return AggregateResult(q.sample_type, q.aggregation_level, buckets, description, q.show_user)


_WORD_FORMS = {
    "today": lambda today: today,
    "yesterday": lambda today: today - timedelta(days=1),
    "this week": lambda today: week_start_for(today),
    "last week": lambda today: week_start_for(today) - timedelta(days=7),
    "this month": lambda today: today.replace(day=1),
    "last month": lambda today: (today.replace(day=1) - timedelta(days=1)).replace(day=1),
}


def parse_reference_date(text: str, now: datetime) -> date:
    """Resolve a natural-language or ISO reference date against local `now`.

    Never defaults silently: unrecognized input raises ReferenceDateError.
    """
    cleaned = " ".join(str(text).strip().lower().split())
    if cleaned in _WORD_FORMS:
        return _WORD_FORMS[cleaned](now.date())
    try:
        return date.fromisoformat(cleaned)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(cleaned).date()
    except ValueError:
        raise ReferenceDateError(f"cannot parse reference date: {text!r}") from None


@dataclass
class GuidelineResult:
    minutes: float
    meets_guideline: bool


def weekly_guideline_minutes(store: HealthStore, user_id: str, week_start: date,
                             guideline_min: float = 150.0) -> GuidelineResult:
    """Sum exercise-time minutes over [weekStart, weekStart + 7 days)."""
    week_end = week_start + timedelta(days=7)
    minutes = sum(
        s.value
        for s in store.samples_for(user_id, SampleKind.EXERCISE_TIME)
        if week_start <= s.start.date() < week_end
    )
    return GuidelineResult(minutes=minutes, meets_guideline=minutes >= guideline_min)
