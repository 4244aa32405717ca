from __future__ import annotations

from datetime import date, datetime, timedelta

import pytest

from bloom.activities import activity_type
from bloom.plan import Intensity, WeeklyPlan, WorkoutSpec

WEEK_START = date(2025, 5, 5)  # a Monday


def make_workout(wid: str, activity: str = "walking", day: int = 0, hour: int = 8,
                 minute: int = 0, duration: int = 30,
                 intensity: Intensity = Intensity.MODERATE) -> WorkoutSpec:
    start = datetime.combine(WEEK_START + timedelta(days=day), datetime.min.time())
    start = start.replace(hour=hour, minute=minute)
    return WorkoutSpec(id=wid, activity=activity_type(activity), intensity=intensity,
                       scheduled_start=start, duration_min=duration)


def make_plan(*workouts: WorkoutSpec, week_index: int = 1,
              week_start: date = WEEK_START) -> WeeklyPlan:
    return WeeklyPlan(week_index=week_index, week_start=week_start, workouts=list(workouts))


@pytest.fixture
def walk_plan() -> WeeklyPlan:
    """Three moderate 20-min walks Mon/Wed/Fri at 08:00."""
    return make_plan(
        make_workout("w1", "walking", day=0, duration=20),
        make_workout("w2", "walking", day=2, duration=20),
        make_workout("w3", "walking", day=4, duration=20),
    )
