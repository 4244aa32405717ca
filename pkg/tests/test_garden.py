from __future__ import annotations

import itertools
import json

import pytest
from hypothesis import given, strategies as st

from bloom.activities import DisplayGroup
from bloom.errors import ConflictError, FrozenGardenError
from bloom.garden import (
    Critter,
    CritterColor,
    CritterKind,
    CritterSize,
    Garden,
    Reward,
    critter_for,
    event_from_dict,
    event_to_dict,
    render_descriptor,
    size_for_duration,
    stage_for_fraction,
)


class TestStageThresholds:
    def test_thirty_to_forty_grows_one_stage(self):
        garden = Garden()
        garden.apply_progress(0.0, 0.30)
        assert garden.state.flower_stage == 1
        grown = garden.apply_progress(0.30, 0.40)
        assert grown == [2]
        assert garden.state.flower_stage == 2

    def test_twenty_to_thirty_does_not_grow(self):
        garden = Garden()
        garden.apply_progress(0.0, 0.20)
        assert garden.state.flower_stage == 1
        assert garden.apply_progress(0.20, 0.30) == []
        assert garden.state.flower_stage == 1

    def test_zero_to_full_blooms_with_five_events(self):
        garden = Garden()
        grown = garden.apply_progress(0.0, 1.0)
        assert grown == [1, 2, 3, 4, 5]
        assert garden.state.flower_stage == 5

    def test_stage_function_exact_boundaries(self):
        assert stage_for_fraction(0.0) == 0
        assert stage_for_fraction(0.19) == 0
        assert stage_for_fraction(0.20) == 1
        assert stage_for_fraction(0.40) == 2
        assert stage_for_fraction(0.99) == 4
        assert stage_for_fraction(1.0) == 5

    def test_stage_function_float_ratio_inputs(self):
        # Ratios of integer minutes must hit the same stages as clean literals.
        assert stage_for_fraction(90 / 150) == 3   # 0.6 one ulp under 3/5
        assert stage_for_fraction(30 / 150) == 1
        assert stage_for_fraction(60 / 300) == 1

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_stage_never_exceeds_five(self, fraction):
        assert 0 <= stage_for_fraction(fraction) <= 5

    def test_growth_events_equal_final_stage_within_week(self):
        garden = Garden()
        events = []
        for old, new in [(0.0, 0.15), (0.15, 0.35), (0.35, 0.5), (0.5, 0.9)]:
            events.extend(garden.apply_progress(old, new))
        assert len(events) == garden.state.flower_stage

    def test_stage_monotone_even_if_fraction_regresses(self):
        garden = Garden()
        garden.apply_progress(0.0, 0.8)
        garden.apply_progress(0.8, 0.5)  # plan edit shrank the fraction upstream
        assert garden.state.flower_stage == 4


class TestCritters:
    def test_twenty_minute_walk_is_medium_bee(self):
        c = critter_for(DisplayGroup.WALKING, 20, "w1")
        assert (c.kind, c.color, c.size) == (CritterKind.BEE, CritterColor.BEE, CritterSize.MEDIUM)

    def test_strength_45min_is_large_orange_butterfly(self):
        c = critter_for(DisplayGroup.STRENGTH, 45, "w2")
        assert (c.kind, c.color, c.size) == (
            CritterKind.BUTTERFLY, CritterColor.ORANGE, CritterSize.LARGE)

    def test_stretching_10min_is_small_yellow_butterfly(self):
        c = critter_for(DisplayGroup.FLEXIBILITY_DANCE, 10, "w3")
        assert (c.kind, c.color, c.size) == (
            CritterKind.BUTTERFLY, CritterColor.YELLOW, CritterSize.SMALL)

    def test_full_color_mapping(self):
        expected = {
            DisplayGroup.WALKING: CritterColor.BEE,
            DisplayGroup.CARDIO: CritterColor.RED,
            DisplayGroup.STRENGTH: CritterColor.ORANGE,
            DisplayGroup.TEAM_SPORTS: CritterColor.GREEN,
            DisplayGroup.FLEXIBILITY_DANCE: CritterColor.YELLOW,
            DisplayGroup.OUTDOOR_RECREATION: CritterColor.BLUE,
            DisplayGroup.MISC: CritterColor.PURPLE,
        }
        for group, color in expected.items():
            assert critter_for(group, 20, "x").color is color

    def test_size_boundaries(self):
        assert size_for_duration(14) is CritterSize.SMALL
        assert size_for_duration(15) is CritterSize.MEDIUM
        assert size_for_duration(29) is CritterSize.MEDIUM
        assert size_for_duration(30) is CritterSize.LARGE

    def test_one_critter_per_workout(self):
        garden = Garden()
        garden.spawn_critter("w1", DisplayGroup.WALKING, 20)
        with pytest.raises(ConflictError):
            garden.spawn_critter("w1", DisplayGroup.WALKING, 20)

    def test_critter_count_tracks_completions(self):
        garden = Garden()
        for i in range(4):
            garden.spawn_critter(f"w{i}", DisplayGroup.CARDIO, 30)
        assert len(garden.state.critters) == 4


class TestWeekAdvance:
    def test_completed_week_persists_flower_and_resets(self):
        garden = Garden()
        garden.apply_progress(0.0, 1.0)
        garden.spawn_critter("w1", DisplayGroup.WALKING, 20)
        garden.advance_week(plan_completed=True)
        assert garden.state.persisted_flowers == 1
        assert garden.state.flower_stage == 0
        assert garden.state.critters == []
        assert garden.state.week_number == 2

    def test_incomplete_week_discards_flower(self):
        garden = Garden()
        garden.apply_progress(0.0, 0.6)
        garden.advance_week(plan_completed=False)
        assert garden.state.persisted_flowers == 0
        assert garden.state.flower_stage == 0

    def test_rewards_by_week(self):
        garden = Garden()
        garden.advance_week(True)
        assert garden.state.rewards == {Reward.BIRD_ON_BRANCH}
        garden.advance_week(False)
        assert garden.state.rewards == {Reward.BIRD_ON_BRANCH, Reward.BEEHIVE}
        garden.advance_week(True)
        assert Reward.BIRD_AND_BIRDHOUSE in garden.state.rewards

    def test_four_week_trace(self):
        # Week 1 complete, week 2 incomplete, weeks 3 and 4 complete.
        garden = Garden()
        persisted = []
        for completed in [True, False, True, True]:
            garden.apply_progress(0.0, 1.0 if completed else 0.5)
            garden.advance_week(plan_completed=completed)
            persisted.append(garden.state.persisted_flowers)
        assert persisted == [1, 1, 2, 3]
        assert garden.state.frozen
        assert garden.state.rewards == {Reward.BIRD_ON_BRANCH, Reward.BEEHIVE,
                                        Reward.BIRD_AND_BIRDHOUSE}

    def test_frozen_garden_rejects_growth_but_keeps_critters(self):
        garden = Garden()
        for completed in [True, True, True, True]:
            garden.apply_progress(0.0, 1.0)
            garden.advance_week(True)
        assert garden.state.frozen
        with pytest.raises(FrozenGardenError):
            garden.apply_progress(0.0, 0.5)
        garden.spawn_critter("w-late", DisplayGroup.WALKING, 20)
        assert len(garden.state.critters) == 1
        frozen_snapshot = (garden.state.persisted_flowers, garden.state.flower_stage,
                           set(garden.state.rewards))
        garden.advance_week(True)
        assert (garden.state.persisted_flowers, garden.state.flower_stage,
                set(garden.state.rewards)) == frozen_snapshot
        assert garden.state.critters == []

    def test_incomplete_week_four_does_not_freeze(self):
        garden = Garden()
        for completed in [True, True, True, False]:
            garden.advance_week(completed)
        assert not garden.state.frozen


class TestEventSourcing:
    def _sample_garden(self) -> Garden:
        garden = Garden()
        garden.apply_progress(0.0, 0.4)
        garden.spawn_critter("w1", DisplayGroup.WALKING, 20)
        garden.apply_progress(0.4, 1.0)
        garden.spawn_critter("w2", DisplayGroup.STRENGTH, 45)
        garden.advance_week(True)
        garden.spawn_critter("w3", DisplayGroup.CARDIO, 10)
        return garden

    def test_replay_reconstructs_state(self):
        garden = self._sample_garden()
        replayed = Garden.replay(garden.events)
        assert render_descriptor(replayed.state) == render_descriptor(garden.state)

    def test_events_round_trip_through_json(self):
        garden = self._sample_garden()
        dumped = json.dumps([event_to_dict(e) for e in garden.events])
        restored = Garden.replay([event_from_dict(d) for d in json.loads(dumped)])
        assert render_descriptor(restored.state) == render_descriptor(garden.state)

    def test_order_independence_of_completions(self):
        # Final state depends only on the completed set, not arrival order.
        durations = [10, 20, 30, 40, 50]
        groups = [DisplayGroup.WALKING, DisplayGroup.CARDIO, DisplayGroup.STRENGTH,
                  DisplayGroup.TEAM_SPORTS, DisplayGroup.MISC]
        for n in range(1, 6):
            total = sum(durations[:n])
            descriptors = set()
            for order in itertools.permutations(range(n)):
                garden = Garden()
                done = 0
                for idx in order:
                    old = done / total
                    done += durations[idx]
                    garden.apply_progress(old, done / total)
                    garden.spawn_critter(f"w{idx}", groups[idx], durations[idx])
                descriptors.add(json.dumps(render_descriptor(garden.state), sort_keys=True))
            assert len(descriptors) == 1


class TestDescriptor:
    def test_empty_state_has_single_seed_flower(self):
        descriptor = render_descriptor(Garden().state)
        assert descriptor["flowers"] == [{"slot": 0, "stage": 0}]
        assert descriptor["critters"] == []
        assert descriptor["rewards"] == []

    def test_purity(self):
        garden = Garden()
        garden.apply_progress(0.0, 0.5)
        garden.spawn_critter("w1", DisplayGroup.WALKING, 20)
        a = json.dumps(render_descriptor(garden.state))
        b = json.dumps(render_descriptor(garden.state))
        assert a == b

    def test_descriptor_shows_persisted_then_current(self):
        garden = Garden()
        garden.apply_progress(0.0, 1.0)
        garden.advance_week(True)
        garden.apply_progress(0.0, 0.4)
        descriptor = render_descriptor(garden.state)
        assert descriptor["flowers"] == [{"slot": 0, "stage": 5}, {"slot": 1, "stage": 2}]
