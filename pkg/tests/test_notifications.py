from __future__ import annotations

import json
from datetime import datetime, time, timedelta

import pytest

from bloom.memory import MemoryStore
from bloom.notifications import (
    CollectingSink,
    ContentClass,
    NotificationPrefs,
    NotificationScheduler,
    NotificationSlot,
    PushGatewaySink,
    SlotKind,
    generate_content,
    schedule_for_plan,
    select_content_class,
    template_content,
)
from bloom.plan import mark_complete_manual
from bloom.provider import ScriptedProvider
from bloom.safety import SafetyPipeline

from conftest import WEEK_START, make_plan, make_workout

CLEAN = {"text": json.dumps({"harmful": False, "rationale": "ok"})}


class TestSchedule:
    def test_one_workout_post_activity_time(self):
        plan = make_plan(make_workout("w1", "walking", day=0, hour=8, duration=30))
        slots = schedule_for_plan(plan)
        post = [s for s in slots if s.kind is SlotKind.POST_ACTIVITY]
        assert len(post) == 1
        assert post[0].fire_at == datetime(2025, 5, 5, 8, 45)  # start + 30 + 15
        assert post[0].workout_id == "w1"

    def test_empty_plan_gives_fourteen_slots(self):
        slots = schedule_for_plan(make_plan())
        assert len(slots) == 14
        assert sum(1 for s in slots if s.kind is SlotKind.MORNING) == 7
        assert sum(1 for s in slots if s.kind is SlotKind.EVENING) == 7

    def test_two_workouts_same_day_two_slots(self):
        plan = make_plan(make_workout("a", day=2, hour=7), make_workout("b", day=2, hour=18))
        post = [s for s in schedule_for_plan(plan) if s.kind is SlotKind.POST_ACTIVITY]
        assert {s.workout_id for s in post} == {"a", "b"}

    def test_sorted_by_fire_time(self):
        plan = make_plan(make_workout("w1", day=3), make_workout("w2", day=1))
        times = [s.fire_at for s in schedule_for_plan(plan)]
        assert times == sorted(times)

    def test_prefs_respected(self):
        prefs = NotificationPrefs(morning_time=time(6, 30), evening_time=time(21, 15))
        slots = schedule_for_plan(make_plan(), prefs)
        mornings = [s for s in slots if s.kind is SlotKind.MORNING]
        assert all(s.fire_at.time() == time(6, 30) for s in mornings)


class TestContentClass:
    def _slot(self, kind, day=0, hour=8, workout_id=None):
        return NotificationSlot(kind, datetime(2025, 5, 5 + day, hour, 0), workout_id)

    def test_morning_with_workout_reminds(self):
        plan = make_plan(make_workout("w1", day=0))
        assert select_content_class(self._slot(SlotKind.MORNING), plan) \
            is ContentClass.REMINDER_UPCOMING

    def test_morning_rest_day_celebrates(self):
        plan = make_plan(make_workout("w1", day=3))
        assert select_content_class(self._slot(SlotKind.MORNING, day=0), plan) \
            is ContentClass.REST_DAY_CELEBRATION

    def test_post_activity_completed_congratulates(self):
        plan = make_plan(make_workout("w1", day=0))
        mark_complete_manual(plan, "w1")
        slot = self._slot(SlotKind.POST_ACTIVITY, hour=8, workout_id="w1")
        assert select_content_class(slot, plan) is ContentClass.POST_ACTIVITY_CONGRATS

    def test_post_activity_incomplete_follows_up(self):
        plan = make_plan(make_workout("w1", day=0))
        slot = self._slot(SlotKind.POST_ACTIVITY, workout_id="w1")
        assert select_content_class(slot, plan) is ContentClass.POST_ACTIVITY_FOLLOWUP

    def test_evening_with_completion_celebrates(self):
        plan = make_plan(make_workout("w1", day=0))
        mark_complete_manual(plan, "w1")
        assert select_content_class(self._slot(SlotKind.EVENING, hour=20), plan) \
            is ContentClass.EVENING_CELEBRATION

    def test_evening_without_completion_reflects(self):
        plan = make_plan(make_workout("w1", day=0))
        assert select_content_class(self._slot(SlotKind.EVENING, hour=20), plan) \
            is ContentClass.EVENING_REFLECTION

    def test_no_plan_morning_is_rest_day(self):
        assert select_content_class(self._slot(SlotKind.MORNING), None) \
            is ContentClass.REST_DAY_CELEBRATION


class TestTemplates:
    def test_reminder_contains_activity_and_time(self):
        plan = make_plan(make_workout("w1", "walking", day=0, hour=8))
        slot = NotificationSlot(SlotKind.MORNING, datetime(2025, 5, 5, 8, 0))
        text = template_content(ContentClass.REMINDER_UPCOMING, plan, slot)
        assert "walking" in text and "08:00" in text

    def test_rest_day_fixed_text(self):
        slot = NotificationSlot(SlotKind.MORNING, datetime(2025, 5, 5, 8, 0))
        text = template_content(ContentClass.REST_DAY_CELEBRATION, None, slot)
        assert "rest day" in text

    def test_deterministic(self):
        plan = make_plan(make_workout("w1", "yoga", day=0, hour=9))
        slot = NotificationSlot(SlotKind.POST_ACTIVITY, datetime(2025, 5, 5, 9, 45), "w1")
        first = template_content(ContentClass.POST_ACTIVITY_FOLLOWUP, plan, slot)
        second = template_content(ContentClass.POST_ACTIVITY_FOLLOWUP, plan, slot)
        assert first == second
        assert "yoga" in first

    def test_every_class_has_template(self):
        slot = NotificationSlot(SlotKind.MORNING, datetime(2025, 5, 5, 8, 0))
        for content_class in ContentClass:
            assert template_content(content_class, None, slot)


class TestGenerateContent:
    def _slot(self):
        return NotificationSlot(SlotKind.MORNING, datetime(2025, 5, 5, 8, 0))

    def test_scripted_llm_content(self):
        provider = ScriptedProvider([{"text": "Scripted cheer!"}])
        safety = SafetyPipeline(ScriptedProvider([CLEAN] * 5))
        text, generated_by, outcome = generate_content(
            ContentClass.REMINDER_UPCOMING, "u", provider, safety, None,
            MemoryStore(), [], self._slot())
        assert (text, generated_by, outcome) == ("Scripted cheer!", "llm", "clean")

    def test_provider_failure_falls_back_to_template(self):
        provider = ScriptedProvider([{"error": "down"}])
        safety = SafetyPipeline(ScriptedProvider([]))
        text, generated_by, outcome = generate_content(
            ContentClass.REST_DAY_CELEBRATION, "u", provider, safety, None,
            MemoryStore(), [], self._slot())
        assert generated_by == "template"
        assert "rest day" in text

    def test_diversity_window_limited_to_ten(self):
        provider = ScriptedProvider([{"text": "fresh"}])
        safety = SafetyPipeline(ScriptedProvider([CLEAN] * 5))
        sink = CollectingSink()
        scheduler = NotificationScheduler(sink)
        history = []
        for i in range(12):
            slot = NotificationSlot(SlotKind.MORNING, datetime(2025, 5, 5, 8, i))
            from bloom.notifications import NotificationRecord
            history.append(NotificationRecord(slot, ContentClass.REMINDER_UPCOMING,
                                              f"note-{i}", "template", slot.fire_at))
        generate_content(ContentClass.REMINDER_UPCOMING, "u", provider, safety, None,
                         MemoryStore(), history, self._slot())
        context_lines = provider.requests[0].messages[1]["content"].splitlines()
        assert "note-2" in context_lines and "note-11" in context_lines
        assert "note-0" not in context_lines and "note-1" not in context_lines


class TestScheduler:
    def _scheduler(self):
        return NotificationScheduler(CollectingSink(), template_only=True)

    def test_fire_records_once(self):
        plan = make_plan(make_workout("w1", day=0, hour=8, duration=30))
        scheduler = self._scheduler()
        now = datetime(2025, 5, 5, 0, 0)
        scheduler.reconcile("u", plan, now)
        slot = scheduler.due("u", datetime(2025, 5, 5, 8, 45))[-1]
        scheduler.fire("u", slot, plan, datetime(2025, 5, 5, 8, 45))
        assert len(scheduler.records["u"]) == 1
        with pytest.raises(ValueError):
            scheduler.fire("u", slot, plan, datetime(2025, 5, 5, 8, 46))

    def test_reschedule_recreates_post_activity_slot(self):
        plan = make_plan(make_workout("w1", day=0, hour=8, duration=30))
        scheduler = self._scheduler()
        now = datetime(2025, 5, 5, 0, 0)
        scheduler.reconcile("u", plan, now)
        plan.workouts[0].scheduled_start = datetime(2025, 5, 5, 17, 0)
        scheduler.reconcile("u", plan, now)
        post = [s for s in scheduler.slots_for("u") if s.kind is SlotKind.POST_ACTIVITY]
        assert len(post) == 1
        assert post[0].fire_at == datetime(2025, 5, 5, 17, 45)

    def test_past_slots_dropped_not_fired_late(self):
        plan = make_plan(make_workout("w1", day=0, hour=8, duration=30))
        scheduler = self._scheduler()
        scheduler.reconcile("u", plan, datetime(2025, 5, 5, 12, 0))
        post = [s for s in scheduler.slots_for("u") if s.kind is SlotKind.POST_ACTIVITY]
        assert post == []  # 08:45 is already in the past

    def test_no_orphans_no_duplicates_after_edits(self):
        plan = make_plan(make_workout("w1", day=1, hour=8), make_workout("w2", day=2, hour=9))
        scheduler = self._scheduler()
        now = datetime(2025, 5, 5, 0, 0)
        scheduler.reconcile("u", plan, now)
        from bloom.plan import Actor, delete_workout
        delete_workout(plan, "w2", Actor.USER_UI)
        scheduler.reconcile("u", plan, now)
        post_ids = [s.workout_id for s in scheduler.slots_for("u")
                    if s.kind is SlotKind.POST_ACTIVITY]
        assert post_ids == ["w1"]
        keys = [s.key() for s in scheduler.slots_for("u")]
        assert len(keys) == len(set(keys))

    def test_push_gateway_sink_uses_token_registry(self):
        sink = PushGatewaySink({"u": "token-123"})
        scheduler = NotificationScheduler(sink, template_only=True)
        plan = make_plan(make_workout("w1", day=0, hour=8, duration=30))
        now = datetime(2025, 5, 5, 0, 0)
        scheduler.reconcile("u", plan, now)
        slot = scheduler.due("u", datetime(2025, 5, 5, 8, 0))[0]
        scheduler.fire("u", slot, plan, datetime(2025, 5, 5, 8, 0))
        assert sink.outbox[0]["token"] == "token-123"
        assert sink.outbox[0]["payload"]["contentClass"]
