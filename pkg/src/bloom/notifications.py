"""Notification scheduling, content selection, and generation.

Three slot kinds per plan week: a morning and an evening slot every day at
the user's preferred times, plus one post-activity slot per planned workout,
firing 15 minutes after the scheduled end (start + duration + 15). Content
class is decided from plan state at fire time; text comes from the provider
with a ten-notification diversity window, falling back to deterministic
templates when the provider fails. Every generated text passes through the
safety pipeline before delivery.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Protocol

from .memory import MemoryStore
from .errors import ProviderError
from .plan import WeeklyPlan, WorkoutStatus, plan_to_dict, canonical_json
from .provider import CompletionRequest, LLMProvider
from .prompting import PromptLibrary
from .safety import SafetyPipeline

logger = logging.getLogger(__name__)

POST_ACTIVITY_DELAY_MIN = 15
DIVERSITY_WINDOW = 10

_TEMPLATE_DIR = Path(__file__).parent / "templates"


class SlotKind(str, Enum):
    MORNING = "morning"
    EVENING = "evening"
    POST_ACTIVITY = "postActivity"


class ContentClass(str, Enum):
    REMINDER_UPCOMING = "reminderUpcoming"
    REST_DAY_CELEBRATION = "restDayCelebration"
    POST_ACTIVITY_CONGRATS = "postActivityCongrats"
    POST_ACTIVITY_FOLLOWUP = "postActivityFollowup"
    EVENING_CELEBRATION = "eveningCelebration"
    EVENING_REFLECTION = "eveningReflection"


@dataclass(frozen=True)
class NotificationPrefs:
    morning_time: time = time(8, 0)
    evening_time: time = time(20, 0)


@dataclass(frozen=True)
class NotificationSlot:
    kind: SlotKind
    fire_at: datetime
    workout_id: Optional[str] = None  # postActivity slots only

    def key(self) -> tuple:
        return (self.kind.value, self.fire_at.isoformat(), self.workout_id)


@dataclass
class NotificationRecord:
    slot: NotificationSlot
    content_class: ContentClass
    text: str
    generated_by: str  # "llm" | "template"
    delivered_at: datetime
    safety_outcome: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.slot.kind.value,
            "fireAt": self.slot.fire_at.isoformat(),
            "workoutId": self.slot.workout_id,
            "contentClass": self.content_class.value,
            "text": self.text,
            "generatedBy": self.generated_by,
            "deliveredAt": self.delivered_at.isoformat(),
            "safetyOutcome": self.safety_outcome,
        }


def schedule_for_plan(plan: WeeklyPlan, prefs: NotificationPrefs = NotificationPrefs()
                      ) -> List[NotificationSlot]:
    """7 mornings + 7 evenings + one post-activity slot per workout, sorted."""
    slots: List[NotificationSlot] = []
    for day_offset in range(7):
        day = plan.week_start + timedelta(days=day_offset)
        slots.append(NotificationSlot(SlotKind.MORNING, datetime.combine(day, prefs.morning_time)))
        slots.append(NotificationSlot(SlotKind.EVENING, datetime.combine(day, prefs.evening_time)))
    for workout in plan.workouts:
        fire_at = (workout.scheduled_start
                   + timedelta(minutes=workout.duration_min + POST_ACTIVITY_DELAY_MIN))
        slots.append(NotificationSlot(SlotKind.POST_ACTIVITY, fire_at, workout.id))
    slots.sort(key=lambda s: (s.fire_at, s.kind.value, s.workout_id or ""))
    return slots


def select_content_class(slot: NotificationSlot, plan: Optional[WeeklyPlan]) -> ContentClass:
    """Pick what the notification should say from plan state at fire time."""
    today = slot.fire_at.date()
    workouts_today = [w for w in (plan.workouts if plan else [])
                      if w.scheduled_start.date() == today]
    if slot.kind is SlotKind.MORNING:
        if workouts_today:
            return ContentClass.REMINDER_UPCOMING
        return ContentClass.REST_DAY_CELEBRATION
    if slot.kind is SlotKind.POST_ACTIVITY:
        workout = None
        if plan is not None:
            matches = [w for w in plan.workouts if w.id == slot.workout_id]
            workout = matches[0] if matches else None
        if workout is not None and workout.status is WorkoutStatus.COMPLETED:
            return ContentClass.POST_ACTIVITY_CONGRATS
        return ContentClass.POST_ACTIVITY_FOLLOWUP
    # evening
    if any(w.status is WorkoutStatus.COMPLETED for w in workouts_today):
        return ContentClass.EVENING_CELEBRATION
    return ContentClass.EVENING_REFLECTION


def template_content(content_class: ContentClass, plan: Optional[WeeklyPlan],
                     slot: NotificationSlot) -> str:
    """Deterministic per-class template fill; same inputs give identical text."""
    template = (_TEMPLATE_DIR / f"{content_class.value}.txt").read_text(encoding="utf-8").strip()
    today = slot.fire_at.date()
    workouts_today = [w for w in (plan.workouts if plan else [])
                      if w.scheduled_start.date() == today]
    workout = None
    if plan is not None and slot.workout_id is not None:
        matches = [w for w in plan.workouts if w.id == slot.workout_id]
        workout = matches[0] if matches else None
    values = {
        "workouts": "; ".join(
            f"{w.activity.name} at {w.scheduled_start.strftime('%H:%M')}"
            for w in sorted(workouts_today, key=lambda w: w.scheduled_start)) or "your plan",
        "activity": workout.activity.name if workout else "activity",
        "completed_count": str(sum(1 for w in workouts_today
                                   if w.status is WorkoutStatus.COMPLETED)),
    }
    for key, value in values.items():
        template = template.replace("{" + key + "}", value)
    return template


def generate_content(content_class: ContentClass, user_id: str, provider: LLMProvider,
                     safety: SafetyPipeline, plan: Optional[WeeklyPlan],
                     memory: MemoryStore, recent: List[NotificationRecord],
                     slot: NotificationSlot,
                     prompts: Optional[PromptLibrary] = None) -> tuple:
    """Personalized text via the provider, template fallback on failure.

    Returns (text, generated_by, safety_outcome).
    """
    prompts = prompts or PromptLibrary()
    window = [r.text for r in recent[-DIVERSITY_WINDOW:]]
    context_parts = [f"Situation: {content_class.value}"]
    if plan is not None:
        context_parts.append("Current plan:\n" + canonical_json(plan_to_dict(plan)))
    block = memory.render_block(user_id)
    if block:
        context_parts.append(block)
    if window:
        context_parts.append("Recent notifications (do not repeat):\n" + "\n".join(window))
    messages = [
        {"role": "system", "content": prompts.chain_prompt("notification")},
        {"role": "user", "content": "\n\n".join(context_parts)},
    ]
    try:
        result = provider.complete(CompletionRequest(messages=messages, temperature=0.8))
        if not result.text:
            raise ProviderError("notification generation returned no text")
        filtered = safety.filter_message("", result.text, history=[])
        return filtered.text, "llm", filtered.outcome.value
    except ProviderError as exc:
        logger.warning("notification generation failed, using template: %s", exc)
        return template_content(content_class, plan, slot), "template", None


class NotificationSink(Protocol):
    def deliver(self, user_id: str, record: NotificationRecord) -> None: ...


class ConsoleSink:
    def deliver(self, user_id: str, record: NotificationRecord) -> None:
        print(f"[{record.delivered_at.isoformat()}] {user_id}: {record.text}")


class CollectingSink:
    """Test/desk sink that just remembers deliveries."""

    def __init__(self):
        self.delivered: List[tuple] = []

    def deliver(self, user_id: str, record: NotificationRecord) -> None:
        self.delivered.append((user_id, record))


class PushGatewaySink:
    """Queues payloads for a push gateway, keyed by registered device tokens."""

    def __init__(self, device_tokens: Dict[str, str]):
        self.device_tokens = dict(device_tokens)
        self.outbox: List[dict] = []

    def register(self, user_id: str, token: str) -> None:
        self.device_tokens[user_id] = token

    def deliver(self, user_id: str, record: NotificationRecord) -> None:
        token = self.device_tokens.get(user_id)
        if token is None:
            logger.warning("no device token for %s; dropping push", user_id)
            return
        self.outbox.append({"token": token, "payload": record.to_dict()})


class NotificationScheduler:
    """Per-user slot book-keeping: reconcile with plan edits, fire due slots.

    Exactly one record per fired slot; rescheduling a workout cancels and
    re-creates its post-activity slot; slots left in the past by a plan edit
    are dropped rather than fired late.
    """

    def __init__(self, sink: NotificationSink, prefs: NotificationPrefs = NotificationPrefs(),
                 template_only: bool = False):
        self.sink = sink
        self.prefs = prefs
        self.template_only = template_only  # control condition: no provider content
        self._slots: Dict[str, List[NotificationSlot]] = {}
        self._fired: Dict[str, set] = {}
        self.records: Dict[str, List[NotificationRecord]] = {}

    def slots_for(self, user_id: str) -> List[NotificationSlot]:
        return list(self._slots.get(user_id, []))

    def reconcile(self, user_id: str, plan: WeeklyPlan, now: datetime) -> List[NotificationSlot]:
        """Rebuild the user's unfired future slots from the current plan."""
        fired = self._fired.setdefault(user_id, set())
        fresh = [s for s in schedule_for_plan(plan, self.prefs)
                 if s.fire_at >= now and s.key() not in fired]
        self._slots[user_id] = fresh
        return list(fresh)

    def due(self, user_id: str, now: datetime) -> List[NotificationSlot]:
        return [s for s in self._slots.get(user_id, []) if s.fire_at <= now]

    def fire(self, user_id: str, slot: NotificationSlot, plan: Optional[WeeklyPlan],
             now: datetime, provider: Optional[LLMProvider] = None,
             safety: Optional[SafetyPipeline] = None,
             memory: Optional[MemoryStore] = None) -> NotificationRecord:
        fired = self._fired.setdefault(user_id, set())
        if slot.key() in fired:
            raise ValueError(f"slot already fired: {slot.key()}")
        content_class = select_content_class(slot, plan)
        if self.template_only or provider is None or safety is None:
            text = template_content(content_class, plan, slot)
            generated_by, outcome = "template", None
        else:
            text, generated_by, outcome = generate_content(
                content_class, user_id, provider, safety, plan,
                memory or MemoryStore(), self.records.get(user_id, []), slot)
        record = NotificationRecord(slot, content_class, text, generated_by, now,
                                    safety_outcome=outcome)
        fired.add(slot.key())
        self._slots[user_id] = [s for s in self._slots.get(user_id, []) if s.key() != slot.key()]
        self.records.setdefault(user_id, []).append(record)
        self.sink.deliver(user_id, record)
        return record
