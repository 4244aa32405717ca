"""Coaching service runtime: one object owning every user-facing operation.

Wires the plan engine, garden, health store, orchestrator, notifications,
and usage log onto a persistence store. All mutations for one user run under
that user's lock (single writer per user); garden state is persisted as its
event log and folded back on load, so a restart reconstructs state
byte-identically.

Garden policy: the flower grows only when a planned workout completes
(manually or by linking); bonus activities draw critters but do not advance
growth, and plan edits never shrink the flower.
"""

from __future__ import annotations

import logging
import threading
from datetime import datetime
from typing import Callable, Dict, List, Optional

from .activities import activity_type
from .coach import CoachOrchestrator
from .dialogue import Mode
from .errors import ConflictError, FrameError, NoPlanError, ProviderError, SessionConflictError, UndefinedProgressError, ValidationError
from .frames import PROTOCOL_VERSION, FrameEmitter, FrameType, WireFrame, parse_frame
from .garden import Garden, event_from_dict, event_to_dict, render_descriptor
from .health import HealthStore, SampleKind, weekly_guideline_minutes
from .memory import MemoryStore, MemorySummary
from .notifications import (
    CollectingSink,
    NotificationPrefs,
    NotificationScheduler,
    NotificationSink,
)
from .plan import (
    Actor,
    WeeklyPlan,
    WorkoutRecord,
    add_workout,
    canonical_json,
    compute_completion_rate,
    delete_workout,
    link_workout,
    mark_complete_manual,
    plan_from_dict,
    plan_to_dict,
    validate_plan,
    workout_from_dict,
)
from .persistence import PersistenceStore
from .prompting import PromptLibrary
from .provider import LLMProvider
from .safety import SafetyPipeline
from .usage import UsageEvent, aggregate_daily_screen_seconds, parse_usage_event

logger = logging.getLogger(__name__)


class _StoreMemory(MemoryStore):
    """Memory store that writes each summary through to persistence."""

    def __init__(self, store: PersistenceStore, token_budget: int = 3500):
        super().__init__(token_budget)
        self.store = store

    def add(self, user_id: str, summary: MemorySummary) -> None:
        super().add(user_id, summary)
        self.store.put(user_id, "memories", summary.session_id, {
            "timestamp": summary.timestamp.isoformat(),
            "sessionId": summary.session_id,
            "text": summary.text,
        })

    def load_user(self, user_id: str) -> None:
        for _, doc in self.store.list_docs(user_id, "memories"):
            summary = MemorySummary(datetime.fromisoformat(doc["timestamp"]),
                                    doc["sessionId"], doc["text"])
            if all(s.session_id != summary.session_id for s in self.for_user(user_id)):
                super().add(user_id, summary)


class _RuntimePlans:
    """Plan repository handed to the orchestrator; saves go through the runtime."""

    def __init__(self, service: "CoachingService"):
        self.service = service

    def current(self, user_id: str) -> Optional[WeeklyPlan]:
        self.service._ensure_loaded(user_id)
        return self.service._plans.get(user_id)

    def save(self, user_id: str, plan: WeeklyPlan) -> None:
        self.service._save_plan(user_id, plan)


class CoachingService:
    def __init__(self, store: PersistenceStore, provider: LLMProvider,
                 safety_provider: Optional[LLMProvider] = None, *,
                 timezone: str = "UTC",
                 clock: Callable[[], datetime] = datetime.now,
                 notification_sink: Optional[NotificationSink] = None,
                 notification_prefs: NotificationPrefs = NotificationPrefs(),
                 template_notifications: bool = False,
                 prompts: Optional[PromptLibrary] = None,
                 token_budget: int = 3500,
                 response_temperature: float = 0.7):
        self.store = store
        self.clock = clock
        self.provider = provider
        self.safety = SafetyPipeline(safety_provider or provider)
        self.health = HealthStore(timezone)
        self.memory = _StoreMemory(store, token_budget)
        self.plans = _RuntimePlans(self)
        self.scheduler = NotificationScheduler(
            notification_sink or CollectingSink(), notification_prefs,
            template_only=template_notifications)
        self.orchestrator = CoachOrchestrator(
            provider=provider, safety=self.safety, plans=self.plans,
            health=self.health, memory=self.memory, prompts=prompts, clock=clock,
            response_temperature=response_temperature)
        self._plans: Dict[str, WeeklyPlan] = {}
        self._gardens: Dict[str, Garden] = {}
        self._loaded: set = set()
        self._locks: Dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    # --- per-user state ----------------------------------------------------

    def _lock_for(self, user_id: str) -> threading.RLock:
        with self._registry_lock:
            return self._locks.setdefault(user_id, threading.RLock())

    def _ensure_loaded(self, user_id: str) -> None:
        if user_id in self._loaded:
            return
        with self._lock_for(user_id):
            if user_id in self._loaded:
                return
            plan_doc = self.store.get(user_id, "plans", "current")
            if plan_doc is not None:
                self._plans[user_id] = plan_from_dict(plan_doc)
            garden_doc = self.store.get(user_id, "gardens", "events")
            events = [event_from_dict(e) for e in (garden_doc or {}).get("events", [])]
            self._gardens[user_id] = Garden.replay(events)
            samples_doc = self.store.get(user_id, "healthSamples", "all")
            if samples_doc is not None:
                self.health.ingest(user_id, samples_doc.get("samples", []))
            self.memory.load_user(user_id)
            self._loaded.add(user_id)

    def _garden(self, user_id: str) -> Garden:
        self._ensure_loaded(user_id)
        return self._gardens[user_id]

    def _persist_garden(self, user_id: str) -> None:
        garden = self._gardens[user_id]
        self.store.put(user_id, "gardens", "events",
                       {"events": [event_to_dict(e) for e in garden.events]})

    def _persist_health(self, user_id: str) -> None:
        self.store.put(user_id, "healthSamples", "all",
                       {"samples": self.health.snapshot(user_id)})

    def _save_plan(self, user_id: str, plan: WeeklyPlan) -> None:
        with self._lock_for(user_id):
            self._ensure_loaded(user_id)
            self._plans[user_id] = plan
            doc = plan_to_dict(plan)
            self.store.put(user_id, "plans", "current", doc)
            self.store.put(user_id, "plans", f"week-{plan.week_index}", doc)
            self.scheduler.reconcile(user_id, plan, self.clock())

    # --- plan operations (REST surface) --------------------------------------

    def current_plan(self, user_id: str) -> Optional[dict]:
        self._ensure_loaded(user_id)
        plan = self._plans.get(user_id)
        return plan_to_dict(plan) if plan else None

    def replace_plan(self, user_id: str, plan_doc: dict) -> dict:
        plan = plan_from_dict(plan_doc)
        check = validate_plan(plan)
        if not check.ok:
            rules = "; ".join(f"{v.workout_id}: {v.rule}" for v in check.violations)
            raise ValidationError(f"plan invalid: {rules}")
        with self._lock_for(user_id):
            self._save_plan(user_id, plan)
            return plan_to_dict(plan)

    def _require_plan(self, user_id: str) -> WeeklyPlan:
        self._ensure_loaded(user_id)
        plan = self._plans.get(user_id)
        if plan is None:
            raise NoPlanError(f"user {user_id!r} has no current plan")
        return plan

    def add_workout_ui(self, user_id: str, workout_doc: dict) -> dict:
        with self._lock_for(user_id):
            plan = self._require_plan(user_id)
            data = dict(workout_doc)
            data.setdefault("id", CoachOrchestrator._next_workout_id(plan))
            data.setdefault("intensity", "moderate")
            spec = workout_from_dict(data)
            add_workout(plan, spec, Actor.USER_UI, now=self.clock())
            self._save_plan(user_id, plan)
            return plan_to_dict(plan)

    def delete_workout_ui(self, user_id: str, workout_id: str) -> dict:
        with self._lock_for(user_id):
            plan = self._require_plan(user_id)
            delete_workout(plan, workout_id, Actor.USER_UI, now=self.clock())
            self._save_plan(user_id, plan)
            return plan_to_dict(plan)

    def mark_complete_ui(self, user_id: str, workout_id: str) -> dict:
        """Manual completion: updates the plan, then grows the garden."""
        with self._lock_for(user_id):
            plan = self._require_plan(user_id)
            old_fraction = self._safe_fraction(plan)
            mark_complete_manual(plan, workout_id, Actor.USER_UI, now=self.clock())
            garden_update = self._on_workout_completed(user_id, plan, workout_id, old_fraction)
            self._save_plan(user_id, plan)
            return {"plan": plan_to_dict(plan), "garden": garden_update}

    @staticmethod
    def _safe_fraction(plan: WeeklyPlan) -> float:
        try:
            return compute_completion_rate(plan)
        except UndefinedProgressError:
            return 0.0

    def _on_workout_completed(self, user_id: str, plan: WeeklyPlan, workout_id: str,
                              old_fraction: float) -> dict:
        garden = self._garden(user_id)
        new_fraction = self._safe_fraction(plan)
        grown: List[int] = []
        if not garden.state.frozen and new_fraction > old_fraction:
            grown = garden.apply_progress(old_fraction, new_fraction)
        workout = plan.workout(workout_id)
        try:
            garden.spawn_critter(workout.id, workout.activity.display_group,
                                 workout.duration_min)
        except ConflictError:
            logger.debug("critter already present for %s", workout_id)
        self._persist_garden(user_id)
        return {"grown": grown, "descriptor": render_descriptor(garden.state)}

    # --- health ingestion -----------------------------------------------------

    def ingest_health(self, user_id: str, batch: List[dict]) -> dict:
        """Store samples, then link workout records to the plan.

        Linked records complete their planned workout and grow the garden;
        unmatched records become bonus activities and only draw critters.
        """
        with self._lock_for(user_id):
            self._ensure_loaded(user_id)
            report = self.health.ingest(user_id, batch)
            links = []
            for sample in self.health.samples_for(user_id, SampleKind.WORKOUT):
                record_id = f"{sample.source_id}:{sample.start.isoformat()}"
                plan = self._plans.get(user_id)
                if plan is None or not plan.contains_day(sample.start.date()):
                    continue
                if any(w.linked_record_id == record_id for w in plan.workouts):
                    continue  # already processed in an earlier batch
                garden = self._garden(user_id)
                if record_id in garden.state.critter_ids():
                    continue  # bonus already drawn
                record = WorkoutRecord(
                    id=record_id, activity=activity_type(sample.activity),
                    start=sample.start, end=sample.end)
                old_fraction = self._safe_fraction(plan)
                decision = link_workout(plan, record)
                links.append({"recordId": record_id, "kind": decision.kind,
                              "workoutId": decision.workout_id})
                if decision.kind == "linked":
                    self._on_workout_completed(user_id, plan, decision.workout_id,
                                               old_fraction)
                    self._save_plan(user_id, plan)
                else:
                    duration = (sample.end - sample.start).total_seconds() / 60
                    try:
                        garden.spawn_critter(record_id, record.activity.display_group,
                                             duration)
                    except ConflictError:
                        pass
                    self._persist_garden(user_id)
            self._persist_health(user_id)
            out = report.to_dict()
            out["links"] = links
            return out

    def guideline(self, user_id: str, week_start) -> dict:
        self._ensure_loaded(user_id)
        result = weekly_guideline_minutes(self.health, user_id, week_start)
        return {"minutes": result.minutes, "meetsGuideline": result.meets_guideline}

    # --- garden ----------------------------------------------------------------

    def garden_descriptor(self, user_id: str) -> dict:
        return render_descriptor(self._garden(user_id).state)

    def advance_week(self, user_id: str) -> dict:
        """Week boundary: persist or discard the flower, reset for next week."""
        with self._lock_for(user_id):
            self._ensure_loaded(user_id)
            plan = self._plans.get(user_id)
            completed = False
            if plan is not None and plan.workouts:
                completed = compute_completion_rate(plan) >= 1.0
            garden = self._garden(user_id)
            garden.advance_week(completed)
            self._persist_garden(user_id)
            return render_descriptor(garden.state)

    # --- notifications ----------------------------------------------------------

    def fire_due_notifications(self, user_id: str, now: Optional[datetime] = None) -> List[dict]:
        now = now or self.clock()
        with self._lock_for(user_id):
            self._ensure_loaded(user_id)
            plan = self._plans.get(user_id)
            if plan is not None:
                self.scheduler.reconcile(user_id, plan, now)
            fired = []
            for slot in self.scheduler.due(user_id, now):
                record = self.scheduler.fire(
                    user_id, slot, plan, now,
                    provider=None if self.scheduler.template_only else self.provider,
                    safety=self.safety, memory=self.memory)
                fired.append(record.to_dict())
            return fired

    def notification_records(self, user_id: str) -> List[dict]:
        return [r.to_dict() for r in self.scheduler.records.get(user_id, [])]

    # --- usage events -------------------------------------------------------------

    def record_usage_event(self, user_id: str, data: dict) -> dict:
        payload = dict(data)
        payload.setdefault("userId", user_id)
        if payload["userId"] != user_id:
            raise ValidationError("userId mismatch with authenticated user")
        event = parse_usage_event(payload)
        with self._lock_for(user_id):
            doc = self.store.get(user_id, "usageEvents", "log") or {"events": []}
            doc["events"].append(event.to_dict())
            self.store.put(user_id, "usageEvents", "log", doc)
        return {"stored": True}

    def usage_events(self, user_id: str) -> List[UsageEvent]:
        doc = self.store.get(user_id, "usageEvents", "log") or {"events": []}
        return [parse_usage_event(e) for e in doc["events"]]

    def usage_daily_screen_totals(self, user_id: str) -> Dict:
        return aggregate_daily_screen_seconds(self.usage_events(user_id))

    # --- chat ------------------------------------------------------------------

    def open_channel(self, user_id: str) -> "ChatChannel":
        self._ensure_loaded(user_id)
        return ChatChannel(self, user_id)

    def end_session(self, session) -> Optional[MemorySummary]:
        with self._lock_for(session.user_id):
            summary = self.orchestrator.end_session_summarize(session)
            self.store.put(session.user_id, "sessions", session.session_id, {
                "sessionId": session.session_id,
                "mode": session.mode.value,
                "startedAt": session.started_at.isoformat(),
                "endedAt": session.ended_at.isoformat(),
                "turns": [
                    {"role": t.role, "text": t.text, "strategy": t.strategy,
                     "safetyOutcome": t.safety_outcome}
                    for t in session.turns
                ],
            })
            return summary


class ChatChannel:
    """Translates wire frames to orchestrator calls for one connection."""

    def __init__(self, service: CoachingService, user_id: str):
        self.service = service
        self.user_id = user_id
        self.session = None
        self.emitter: Optional[FrameEmitter] = None
        self._pre_session = FrameEmitter("-")

    def _emit(self, frame_type: FrameType, payload: dict) -> WireFrame:
        emitter = self.emitter or self._pre_session
        return emitter.emit(frame_type, payload)

    def _error(self, code: str, message: str) -> List[dict]:
        return [self._emit(FrameType.ERROR, {"code": code, "message": message}).to_dict()]

    def handle(self, raw: dict) -> List[dict]:
        """Process one inbound frame; returns outbound frames in seq order."""
        try:
            frame = parse_frame(raw)
        except FrameError as exc:
            return self._error("malformed_frame", str(exc))
        if frame.type is FrameType.SESSION_CONTROL:
            return self._handle_control(frame)
        if frame.type is FrameType.USER_MESSAGE:
            return self._handle_user_message(frame)
        return self._error("unroutable_frame",
                           f"clients may not send {frame.type.value} frames")

    def _handle_control(self, frame: WireFrame) -> List[dict]:
        action = frame.payload.get("action")
        if action == "start":
            try:
                mode = Mode(frame.payload.get("mode", "atwill"))
            except ValueError:
                return self._error("bad_mode", f"unknown mode {frame.payload.get('mode')!r}")
            try:
                with self.service._lock_for(self.user_id):
                    self.session = self.service.orchestrator.start_session(self.user_id, mode)
            except SessionConflictError as exc:
                return self._error("session_conflict", str(exc))
            self.emitter = FrameEmitter(self.session.session_id)
            ack = self._emit(FrameType.SESSION_CONTROL, {
                "action": "started", "mode": mode.value,
                "sessionId": self.session.session_id,
                "protocol": PROTOCOL_VERSION,
            })
            return [ack.to_dict()]
        if action == "resume":
            if self.session is None or self.emitter is None:
                return self._error("no_session", "nothing to resume on this connection")
            last_seq = int(frame.payload.get("lastSeq", 0))
            return [f.to_dict() for f in self.emitter.frames_after(last_seq)]
        if action == "end":
            if self.session is None:
                return self._error("no_session", "no active session to end")
            summary = self.service.end_session(self.session)
            payload = {"action": "ended", "sessionId": self.session.session_id}
            if summary is not None:
                payload["summary"] = summary.text
            frame_out = self._emit(FrameType.SESSION_CONTROL, payload)
            self.session = None
            return [frame_out.to_dict()]
        return self._error("bad_action", f"unknown sessionControl action {action!r}")

    def _handle_user_message(self, frame: WireFrame) -> List[dict]:
        if self.session is None:
            return self._error("no_session", "start a session before sending messages")
        if frame.session_id not in (None, self.session.session_id):
            return self._error("session_mismatch",
                               f"frame addressed to {frame.session_id!r}")
        text = str(frame.payload["text"])
        garden_before = canonical_json(self.service.garden_descriptor(self.user_id))
        try:
            with self.service._lock_for(self.user_id):
                turn = self.service.orchestrator.step(self.session, text)
        except ProviderError as exc:
            return self._error("provider_failure", f"retriable: {exc}")
        out: List[WireFrame] = []
        for log in turn.tool_calls:
            out.append(self._emit(FrameType.TOOL_STATUS, {
                "tool": log.name,
                "status": "ok" if log.ok else "error",
                "detail": log.error,
            }))
        for widget in turn.widgets:
            if widget.kind == "plan":
                out.append(self._emit(FrameType.PLAN_WIDGET, {"plan": widget.payload}))
            elif widget.kind == "chart":
                out.append(self._emit(FrameType.CHART_WIDGET, widget.payload))
        descriptor = self.service.garden_descriptor(self.user_id)
        if canonical_json(descriptor) != garden_before:
            out.append(self._emit(FrameType.GARDEN_EVENT, {"descriptor": descriptor}))
        out.append(self._emit(FrameType.AGENT_TEXT, {
            "text": turn.text,
            "strategy": turn.strategy,
            "safetyOutcome": turn.safety_outcome,
        }))
        return [f.to_dict() for f in out]
