"""Weekly exercise plans: validation, completion, linking, edits, and metrics.

A plan is one week of FITT-parameterized workouts (frequency is implied by the
workout list, plus intensity, time, and type per entry). Incoming wearable
workout records are linked to planned workouts when they plausibly match;
unmatched records become bonus activities. Every mutation appends to an
append-only edit log tagged with the acting party so edit counts can be
reported per actor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from enum import Enum
from typing import List, Optional

from .activities import ActivityType, activity_type
from .errors import ConflictError, NoPlanError, NotFoundError, UndefinedProgressError, ValidationError

# Linking window around the scheduled start, in minutes. A record further out
# (or on another calendar day) is a bonus activity, never a link.
LINK_WINDOW_MINUTES = 120

# Completion fraction at or above which the weekly goal counts as met.
GOAL_MET_THRESHOLD = 0.8

# Public-health recommendation for weekly exercise minutes.
GUIDELINE_WEEKLY_MINUTES = 150


class Intensity(str, Enum):
    LIGHT = "light"
    MODERATE = "moderate"
    VIGOROUS = "vigorous"


class WorkoutStatus(str, Enum):
    UPCOMING = "upcoming"
    COMPLETED = "completed"
    MISSED = "missed"


class CompletionSource(str, Enum):
    NONE = "none"
    LINKED = "linked"
    MANUAL = "manual"


class EditKind(str, Enum):
    ADD = "add"
    DELETE = "delete"
    MODIFY = "modify"


class Actor(str, Enum):
    USER_UI = "user-ui"
    AGENT_TOOL = "agent-tool"
    SYSTEM = "system"


class RecordClassification(str, Enum):
    UNLINKED = "unlinked"
    LINKED = "linked"
    BONUS = "bonus"


@dataclass
class WorkoutSpec:
    id: str
    activity: ActivityType
    intensity: Intensity
    scheduled_start: datetime
    duration_min: int
    status: WorkoutStatus = WorkoutStatus.UPCOMING
    completion_source: CompletionSource = CompletionSource.NONE
    linked_record_id: Optional[str] = None


@dataclass
class PlanEdit:
    kind: EditKind
    workout_id: str
    timestamp: datetime
    actor: Actor
    detail: str = ""


@dataclass
class WeeklyPlan:
    week_index: int
    week_start: date
    workouts: List[WorkoutSpec] = field(default_factory=list)
    edit_log: List[PlanEdit] = field(default_factory=list)

    def workout(self, workout_id: str) -> WorkoutSpec:
        for w in self.workouts:
            if w.id == workout_id:
                return w
        raise NotFoundError(f"no workout with id {workout_id!r}")

    def contains_day(self, day: date) -> bool:
        return self.week_start <= day < self.week_start + timedelta(days=7)


@dataclass
class WorkoutRecord:
    id: str
    activity: ActivityType
    start: datetime
    end: datetime
    classification: RecordClassification = RecordClassification.UNLINKED


@dataclass
class Violation:
    workout_id: Optional[str]
    rule: str


@dataclass
class PlanValidation:
    ok: bool
    violations: List[Violation]


@dataclass
class LinkDecision:
    """Outcome of presenting one workout record to a plan."""

    kind: str  # "linked" | "bonus"
    record_id: str
    workout_id: Optional[str] = None


@dataclass
class Progression:
    advice: str  # "ramp_up" | "maintain" | "revisit_barriers"
    completion_rate: float
    weekly_exercise_min: float
    goal_met: bool
    below_guideline: bool


def validate_plan(plan: WeeklyPlan) -> PlanValidation:
    """Check every plan invariant; violations are data, not exceptions."""
    violations: List[Violation] = []
    week_end = plan.week_start + timedelta(days=7)
    seen_ids = set()
    if plan.week_index < 1:
        violations.append(Violation(None, "weekIndex >= 1"))
    for w in plan.workouts:
        if w.id in seen_ids:
            violations.append(Violation(w.id, "workout ids unique within the plan"))
        seen_ids.add(w.id)
        if w.duration_min <= 0:
            violations.append(Violation(w.id, "durationMin > 0"))
        if not (plan.week_start <= w.scheduled_start.date() < week_end):
            violations.append(Violation(w.id, "outside week"))
        completed = w.status is WorkoutStatus.COMPLETED
        if completed != (w.completion_source is not CompletionSource.NONE):
            violations.append(Violation(w.id, "status completed iff completionSource set"))
        if (w.linked_record_id is not None) != (w.completion_source is CompletionSource.LINKED):
            violations.append(Violation(w.id, "linkedRecordId set iff completionSource linked"))
    return PlanValidation(ok=not violations, violations=violations)


def compute_completion_rate(plan: WeeklyPlan) -> float:
    """Duration-weighted completion: completed minutes over all planned minutes."""
    total = sum(w.duration_min for w in plan.workouts)
    if total == 0:
        raise UndefinedProgressError("completion rate is undefined for an empty plan")
    done = sum(w.duration_min for w in plan.workouts if w.status is WorkoutStatus.COMPLETED)
    return done / total


def link_workout(plan: Optional[WeeklyPlan], record: WorkoutRecord) -> LinkDecision:
    """Link a wearable record to the nearest matching planned workout, else bonus.

    A candidate must share the activity type and calendar day, be not yet
    completed, and start within LINK_WINDOW_MINUTES of the record. Ties on
    |start delta| break toward the earliest scheduled start. Re-presenting an
    already-classified record returns the prior decision unchanged.
    """
    if plan is None:
        raise NoPlanError(f"no plan stored for the week of record {record.id!r}")

    # Idempotency: a record never re-links or flips bonus -> linked.
    for w in plan.workouts:
        if w.linked_record_id == record.id:
            return LinkDecision(kind="linked", record_id=record.id, workout_id=w.id)
    if record.classification is RecordClassification.BONUS:
        return LinkDecision(kind="bonus", record_id=record.id)
    if record.classification is RecordClassification.LINKED:
        # Linked against some other stored plan; nothing to do here.
        return LinkDecision(kind="linked", record_id=record.id)

    window = timedelta(minutes=LINK_WINDOW_MINUTES)
    candidates = [
        w
        for w in plan.workouts
        if w.activity.name == record.activity.name
        and w.scheduled_start.date() == record.start.date()
        and w.status is not WorkoutStatus.COMPLETED
        and abs(record.start - w.scheduled_start) <= window
    ]
    if not candidates:
        record.classification = RecordClassification.BONUS
        return LinkDecision(kind="bonus", record_id=record.id)

    best = min(candidates, key=lambda w: (abs(record.start - w.scheduled_start), w.scheduled_start))
    best.status = WorkoutStatus.COMPLETED
    best.completion_source = CompletionSource.LINKED
    best.linked_record_id = record.id
    record.classification = RecordClassification.LINKED
    plan.edit_log.append(
        PlanEdit(EditKind.MODIFY, best.id, record.start, Actor.SYSTEM, detail=f"linked record {record.id}")
    )
    return LinkDecision(kind="linked", record_id=record.id, workout_id=best.id)


def mark_complete_manual(plan: WeeklyPlan, workout_id: str, actor: Actor = Actor.USER_UI,
                         now: Optional[datetime] = None) -> WeeklyPlan:
    w = plan.workout(workout_id)
    if w.status is WorkoutStatus.COMPLETED:
        raise ConflictError(f"workout {workout_id!r} is already completed")
    w.status = WorkoutStatus.COMPLETED
    w.completion_source = CompletionSource.MANUAL
    plan.edit_log.append(
        PlanEdit(EditKind.MODIFY, workout_id, now or datetime.now(), actor, detail="marked complete")
    )
    return plan


def add_workout(plan: WeeklyPlan, spec: WorkoutSpec, actor: Actor,
                now: Optional[datetime] = None) -> WeeklyPlan:
    if spec.duration_min <= 0:
        raise ValidationError("durationMin must be > 0")
    if not plan.contains_day(spec.scheduled_start.date()):
        raise ValidationError("workout falls outside the plan week")
    if any(w.id == spec.id for w in plan.workouts):
        raise ValidationError(f"workout id {spec.id!r} already present")
    plan.workouts.append(spec)
    plan.edit_log.append(PlanEdit(EditKind.ADD, spec.id, now or datetime.now(), actor))
    return plan


def delete_workout(plan: WeeklyPlan, workout_id: str, actor: Actor,
                   now: Optional[datetime] = None) -> WeeklyPlan:
    w = plan.workout(workout_id)
    plan.workouts.remove(w)
    detail = "deleted completed workout" if w.status is WorkoutStatus.COMPLETED else ""
    plan.edit_log.append(PlanEdit(EditKind.DELETE, workout_id, now or datetime.now(), actor, detail=detail))
    return plan


def plan_balance_score(plan: WeeklyPlan) -> int:
    """+1 for each activity category present (aerobic, strength, flexibility)."""
    return len({w.activity.category for w in plan.workouts})


def unique_activity_count(plan: WeeklyPlan) -> int:
    return len({w.activity.name for w in plan.workouts})


def propose_progression(plan: WeeklyPlan, weekly_exercise_min: float) -> Progression:
    """Week-over-week advice once the plan week has ended.

    Goal met and still under the weekly guideline: ramp up (longer durations
    or new activity types). Goal met at or above the guideline: maintain.
    Goal missed: revisit barriers and revise the plan.
    """
    rate = compute_completion_rate(plan)
    goal_met = rate >= GOAL_MET_THRESHOLD
    below = weekly_exercise_min < GUIDELINE_WEEKLY_MINUTES
    if goal_met and below:
        advice = "ramp_up"
    elif goal_met:
        advice = "maintain"
    else:
        advice = "revisit_barriers"
    return Progression(advice, rate, weekly_exercise_min, goal_met, below)


def edit_counts_by_actor(plan: WeeklyPlan) -> dict:
    counts: dict = {}
    for e in plan.edit_log:
        counts[e.actor.value] = counts.get(e.actor.value, 0) + 1
    return counts


# --- canonical JSON -----------------------------------------------------

def workout_to_dict(w: WorkoutSpec) -> dict:
    return {
        "id": w.id,
        "activity": w.activity.name,
        "intensity": w.intensity.value,
        "scheduledStart": w.scheduled_start.isoformat(),
        "durationMin": int(w.duration_min),
        "status": w.status.value,
        "completionSource": w.completion_source.value,
        "linkedRecordId": w.linked_record_id,
    }


def plan_to_dict(plan: WeeklyPlan) -> dict:
    """Canonical plan object: workouts sorted by scheduled start, ISO times."""
    workouts = sorted(plan.workouts, key=lambda w: (w.scheduled_start, w.id))
    return {
        "weekIndex": plan.week_index,
        "weekStart": plan.week_start.isoformat(),
        "workouts": [workout_to_dict(w) for w in workouts],
        "editLog": [
            {
                "kind": e.kind.value,
                "workoutId": e.workout_id,
                "timestamp": e.timestamp.isoformat(),
                "actor": e.actor.value,
                "detail": e.detail,
            }
            for e in plan.edit_log
        ],
    }


def canonical_json(obj) -> str:
    """Byte-stable JSON used for widget payloads and persistence."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def plan_to_json(plan: WeeklyPlan) -> str:
    return canonical_json(plan_to_dict(plan))


def workout_from_dict(data: dict) -> WorkoutSpec:
    try:
        return WorkoutSpec(
            id=str(data["id"]),
            activity=activity_type(str(data["activity"])),
            intensity=Intensity(data.get("intensity", "moderate")),
            scheduled_start=datetime.fromisoformat(data["scheduledStart"]),
            duration_min=int(data["durationMin"]),
            status=WorkoutStatus(data.get("status", "upcoming")),
            completion_source=CompletionSource(data.get("completionSource", "none")),
            linked_record_id=data.get("linkedRecordId"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed workout object: {exc}") from exc


def plan_from_dict(data: dict) -> WeeklyPlan:
    try:
        plan = WeeklyPlan(
            week_index=int(data["weekIndex"]),
            week_start=date.fromisoformat(data["weekStart"]),
            workouts=[workout_from_dict(w) for w in data.get("workouts", [])],
        )
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed plan object: {exc}") from exc
    for e in data.get("editLog", []):
        plan.edit_log.append(
            PlanEdit(
                kind=EditKind(e["kind"]),
                workout_id=e["workoutId"],
                timestamp=datetime.fromisoformat(e["timestamp"]),
                actor=Actor(e["actor"]),
                detail=e.get("detail", ""),
            )
        )
    return plan


def week_start_for(day: date) -> date:
    """Monday 00:00 starts the week."""
    return day - timedelta(days=day.weekday())
