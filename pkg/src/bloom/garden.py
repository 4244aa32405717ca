"""Ambient-display garden: flower growth, weekly persistence, and critters.

The flower advances in 20% increments of weekly plan completion and fully
blooms at 100%. Completing a week keeps the flower and starts a new one;
missing the goal restarts growth from scratch. Weeks 2-4 add persistent
rewards (bird on a branch, beehive, bird and birdhouse), and every completed
workout draws a critter whose kind, color, and size encode the activity.

The garden is event-sourced: state is a fold over an append-only event list,
so any snapshot can be reconstructed byte-identically for replay, recovery,
and lockscreen re-rendering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Set

from .activities import DisplayGroup
from .errors import ConflictError, FrozenGardenError

MAX_STAGE = 5  # growth fifths; 5 = fully bloomed
FINAL_REWARD_WEEK = 4

# Tolerance for stage thresholds: completion fractions arrive as float ratios
# of integer minutes, so 0.6 may sit one ulp under 3/5.
_STAGE_EPS = 1e-9


class Reward(str, Enum):
    BIRD_ON_BRANCH = "birdOnBranch"
    BEEHIVE = "beehive"
    BIRD_AND_BIRDHOUSE = "birdAndBirdhouse"


# First week in which each reward can appear.
REWARD_WEEKS = {
    2: Reward.BIRD_ON_BRANCH,
    3: Reward.BEEHIVE,
    4: Reward.BIRD_AND_BIRDHOUSE,
}


class CritterKind(str, Enum):
    BEE = "bee"
    BUTTERFLY = "butterfly"


class CritterColor(str, Enum):
    BEE = "bee"
    RED = "red"
    ORANGE = "orange"
    GREEN = "green"
    YELLOW = "yellow"
    BLUE = "blue"
    PURPLE = "purple"


class CritterSize(str, Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


_GROUP_COLORS = {
    DisplayGroup.WALKING: CritterColor.BEE,
    DisplayGroup.CARDIO: CritterColor.RED,
    DisplayGroup.STRENGTH: CritterColor.ORANGE,
    DisplayGroup.TEAM_SPORTS: CritterColor.GREEN,
    DisplayGroup.FLEXIBILITY_DANCE: CritterColor.YELLOW,
    DisplayGroup.OUTDOOR_RECREATION: CritterColor.BLUE,
    DisplayGroup.MISC: CritterColor.PURPLE,
}


@dataclass(frozen=True)
class Critter:
    kind: CritterKind
    color: CritterColor
    size: CritterSize
    workout_id: str


def stage_for_fraction(fraction: float) -> int:
    """Stage k is reached once fraction covers k full fifths (40% => stage 2)."""
    if fraction <= 0:
        return 0
    return min(MAX_STAGE, int(math.floor(fraction * MAX_STAGE + _STAGE_EPS)))


def size_for_duration(duration_min: float) -> CritterSize:
    # Under 15 small, 15 up to 30 medium, 30 and over large.
    if duration_min < 15:
        return CritterSize.SMALL
    if duration_min < 30:
        return CritterSize.MEDIUM
    return CritterSize.LARGE


def critter_for(display_group: DisplayGroup, duration_min: float, workout_id: str) -> Critter:
    kind = CritterKind.BEE if display_group is DisplayGroup.WALKING else CritterKind.BUTTERFLY
    return Critter(kind, _GROUP_COLORS[display_group], size_for_duration(duration_min), workout_id)


@dataclass
class GardenState:
    week_number: int = 1
    flower_stage: int = 0
    persisted_flowers: int = 0
    rewards: Set[Reward] = field(default_factory=set)
    critters: List[Critter] = field(default_factory=list)
    frozen: bool = False

    def critter_ids(self) -> Set[str]:
        return {c.workout_id for c in self.critters}


# --- events ---------------------------------------------------------------

@dataclass(frozen=True)
class ProgressAdvanced:
    old_fraction: float
    new_fraction: float


@dataclass(frozen=True)
class CritterEarned:
    workout_id: str
    display_group: DisplayGroup
    duration_min: float


@dataclass(frozen=True)
class WeekAdvanced:
    plan_completed: bool


GardenEvent = object  # ProgressAdvanced | CritterEarned | WeekAdvanced


def event_to_dict(event: GardenEvent) -> dict:
    if isinstance(event, ProgressAdvanced):
        return {"type": "progress", "oldFraction": event.old_fraction, "newFraction": event.new_fraction}
    if isinstance(event, CritterEarned):
        return {
            "type": "critter",
            "workoutId": event.workout_id,
            "displayGroup": event.display_group.value,
            "durationMin": event.duration_min,
        }
    if isinstance(event, WeekAdvanced):
        return {"type": "weekAdvance", "planCompleted": event.plan_completed}
    raise TypeError(f"not a garden event: {event!r}")


def event_from_dict(data: dict) -> GardenEvent:
    kind = data["type"]
    if kind == "progress":
        return ProgressAdvanced(data["oldFraction"], data["newFraction"])
    if kind == "critter":
        return CritterEarned(data["workoutId"], DisplayGroup(data["displayGroup"]), data["durationMin"])
    if kind == "weekAdvance":
        return WeekAdvanced(data["planCompleted"])
    raise ValueError(f"unknown garden event type: {kind!r}")


class Garden:
    """Event log plus the state folded from it."""

    def __init__(self, events: Optional[Iterable[GardenEvent]] = None):
        self.state = GardenState()
        self.events: List[GardenEvent] = []
        for event in events or []:
            self._fold(event)
            self.events.append(event)

    @classmethod
    def replay(cls, events: Iterable[GardenEvent]) -> "Garden":
        return cls(events)

    def _fold(self, event: GardenEvent) -> List[int]:
        state = self.state
        if isinstance(event, ProgressAdvanced):
            target = stage_for_fraction(event.new_fraction)
            stages_crossed = list(range(state.flower_stage + 1, max(state.flower_stage, target) + 1))
            state.flower_stage = max(state.flower_stage, target)
            return stages_crossed
        if isinstance(event, CritterEarned):
            state.critters.append(critter_for(event.display_group, event.duration_min, event.workout_id))
            return []
        if isinstance(event, WeekAdvanced):
            if not state.frozen:
                if event.plan_completed:
                    state.persisted_flowers += 1
                if state.week_number == FINAL_REWARD_WEEK and event.plan_completed:
                    state.frozen = True
                state.flower_stage = 0
            state.week_number += 1
            state.critters = []
            if not state.frozen:
                reward = REWARD_WEEKS.get(state.week_number)
                if reward is not None:
                    state.rewards.add(reward)
            return []
        raise TypeError(f"not a garden event: {event!r}")

    # --- operations -------------------------------------------------------

    def apply_progress(self, old_fraction: float, new_fraction: float) -> List[int]:
        """Advance the flower; returns the list of stages newly reached."""
        if self.state.frozen:
            raise FrozenGardenError("garden display is frozen; growth is fixed")
        event = ProgressAdvanced(old_fraction, new_fraction)
        grown = self._fold(event)
        self.events.append(event)
        return grown

    def spawn_critter(self, workout_id: str, display_group: DisplayGroup, duration_min: float) -> Critter:
        if workout_id in self.state.critter_ids():
            raise ConflictError(f"critter already drawn for workout {workout_id!r}")
        event = CritterEarned(workout_id, display_group, duration_min)
        self._fold(event)
        self.events.append(event)
        return self.state.critters[-1]

    def advance_week(self, plan_completed: bool) -> None:
        event = WeekAdvanced(plan_completed)
        self._fold(event)
        self.events.append(event)


def render_descriptor(state: GardenState) -> dict:
    """Serializable scene: persisted flowers first, then the growing one.

    Pure function of state with canonical ordering (critters sorted by
    workout id), so identical states render byte-identically.
    """
    flowers = [{"slot": i, "stage": MAX_STAGE} for i in range(state.persisted_flowers)]
    flowers.append({"slot": state.persisted_flowers, "stage": state.flower_stage})
    rewards = [r.value for week, r in sorted(REWARD_WEEKS.items()) if r in state.rewards]
    critters = [
        {"kind": c.kind.value, "color": c.color.value, "size": c.size.value, "workoutId": c.workout_id}
        for c in sorted(state.critters, key=lambda c: c.workout_id)
    ]
    return {
        "weekNumber": state.week_number,
        "frozen": state.frozen,
        "flowers": flowers,
        "rewards": rewards,
        "critters": critters,
    }
