from __future__ import annotations

import random
from datetime import date, datetime, timedelta

import pytest

from bloom.errors import ReferenceDateError, ValidationError
from bloom.health import (
    AggregationLevel,
    AggregationQuery,
    HealthStore,
    MEAN_KINDS,
    SampleKind,
    parse_reference_date,
    parse_sample,
    query_health_data,
    weekly_guideline_minutes,
)

DAY = date(2025, 5, 10)


def sample(kind="stepCount", value=1000, start="2025-05-10T09:00:00", minutes=10,
           source="watch-1", **extra):
    begin = datetime.fromisoformat(start)
    item = {
        "kind": kind,
        "value": value,
        "start": begin.isoformat(),
        "end": (begin + timedelta(minutes=minutes)).isoformat(),
        "sourceId": source,
    }
    item.update(extra)
    return item


def brute_force_aggregate(raw_samples, kind, days):
    """Independent scan: group sample values by calendar day of `start`."""
    per_day = {}
    for s in raw_samples:
        if s["kind"] != kind:
            continue
        day = datetime.fromisoformat(s["start"]).date()
        per_day.setdefault(day, []).append(float(s["value"]))
    out = []
    for d in days:
        values = per_day.get(d, [])
        if SampleKind(kind) in MEAN_KINDS:
            out.append(sum(values) / len(values) if values else 0.0)
        else:
            out.append(float(sum(values)))
    return out


class TestIngest:
    def test_two_distinct_accepted(self):
        store = HealthStore()
        report = store.ingest("u", [sample(start="2025-05-10T09:00:00"),
                                    sample(start="2025-05-10T10:00:00")])
        assert report.accepted == 2 and report.duplicates == 0

    def test_duplicate_in_batch_dropped(self):
        store = HealthStore()
        report = store.ingest("u", [sample(), sample()])
        assert report.accepted == 1 and report.duplicates == 1

    def test_end_before_start_rejected(self):
        store = HealthStore()
        bad = sample()
        bad["end"] = "2025-05-10T08:00:00"
        report = store.ingest("u", [bad, sample(start="2025-05-10T11:00:00")])
        assert report.accepted == 1
        assert len(report.rejected) == 1 and "end" in report.rejected[0][1]

    def test_double_ingest_idempotent(self):
        batch = [sample(start=f"2025-05-10T0{h}:00:00", value=100 * h) for h in range(1, 6)]
        store = HealthStore()
        store.ingest("u", batch)
        first = store.snapshot("u")
        report = store.ingest("u", batch)
        assert report.accepted == 0 and report.duplicates == 5
        assert store.snapshot("u") == first

    def test_negative_value_rejected(self):
        report = HealthStore().ingest("u", [sample(value=-5)])
        assert report.accepted == 0 and report.rejected

    def test_heart_rate_must_be_positive(self):
        with pytest.raises(ValidationError):
            parse_sample(sample(kind="heartRate", value=0), HealthStore().tz)

    def test_workout_requires_activity(self):
        report = HealthStore().ingest("u", [sample(kind="workout", value=30)])
        assert report.rejected
        ok = HealthStore().ingest("u", [sample(kind="workout", value=30, activity="walking")])
        assert ok.accepted == 1

    def test_unknown_kind_rejected_batch_continues(self):
        report = HealthStore().ingest("u", [sample(kind="bloodType"), sample()])
        assert report.accepted == 1 and report.rejected[0][0] == 0

    def test_concurrent_ingest_and_query_consistent(self):
        import threading

        store = HealthStore()
        batches = [
            [sample(start=f"2025-05-{day:02d}T{h:02d}:00:00", value=100, source=f"s{day}")
             for h in range(8, 13)]
            for day in range(1, 9)
        ]
        seen = []

        def reader():
            for _ in range(50):
                total = sum(s["value"] for s in store.snapshot("u"))
                seen.append(total)

        threads = [threading.Thread(target=store.ingest, args=("u", b)) for b in batches]
        threads.append(threading.Thread(target=reader))
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        # Every observed snapshot is a whole number of complete batches.
        assert all(total % 500 == 0 for total in seen)
        assert sum(s["value"] for s in store.snapshot("u")) == 500 * len(batches)


class TestQueries:
    def test_day_total_matches_fixture(self):
        store = HealthStore()
        store.ingest("u", [sample(value=3000, start="2025-05-10T09:00:00"),
                           sample(value=2500, start="2025-05-10T18:00:00")])
        result = query_health_data(store, "u", AggregationQuery(
            SampleKind.STEP_COUNT, DAY, AggregationLevel.DAY))
        assert result.total() == 5500  # brute-force sum over the fixture

    def test_week_heart_rate_daily_means(self):
        store = HealthStore()
        raw = []
        for d in range(7):
            for reading, value in enumerate([60 + d, 70 + d, 80 + d]):
                raw.append(sample(kind="heartRate", value=value,
                                  start=f"2025-05-{5 + d:02d}T{8 + reading:02d}:00:00"))
        store.ingest("u", raw)
        result = query_health_data(store, "u", AggregationQuery(
            SampleKind.HEART_RATE, date(2025, 5, 7), AggregationLevel.WEEK))
        days = [date(2025, 5, 5) + timedelta(days=i) for i in range(7)]
        expected = brute_force_aggregate(raw, "heartRate", days)
        assert [b.value for b in result.buckets] == pytest.approx(expected)
        assert [b.period_start for b in result.buckets] == days

    def test_week_with_no_samples_gives_seven_zero_buckets(self):
        result = query_health_data(HealthStore(), "u", AggregationQuery(
            SampleKind.STEP_COUNT, DAY, AggregationLevel.WEEK))
        assert len(result.buckets) == 7
        assert all(b.value == 0.0 for b in result.buckets)

    def test_month_buckets_tile_calendar_month(self):
        result = query_health_data(HealthStore(), "u", AggregationQuery(
            SampleKind.STEP_COUNT, date(2025, 2, 14), AggregationLevel.MONTH))
        assert len(result.buckets) == 28
        assert result.buckets[0].period_start == date(2025, 2, 1)
        assert result.buckets[-1].period_start == date(2025, 2, 28)
        starts = [b.period_start for b in result.buckets]
        assert all((b - a).days == 1 for a, b in zip(starts, starts[1:]))  # no gaps or overlap

    def test_show_user_flag_echoed(self):
        result = query_health_data(HealthStore(), "u", AggregationQuery(
            SampleKind.STEP_COUNT, DAY, AggregationLevel.DAY, show_user=True))
        assert result.show_user is True

    def test_randomized_fixtures_match_brute_force(self):
        rng = random.Random(42)
        store = HealthStore()
        raw = []
        kinds = [k.value for k in SampleKind if k is not SampleKind.WORKOUT]
        for i in range(400):
            day = date(2025, 5, 1) + timedelta(days=rng.randrange(40))
            start = datetime.combine(day, datetime.min.time()) + timedelta(
                minutes=rng.randrange(24 * 60))
            raw.append(sample(kind=rng.choice(kinds), value=rng.randrange(1, 5000),
                              start=start.isoformat(), source=f"src-{i}"))
        store.ingest("u", raw)
        for kind in SampleKind:
            if kind is SampleKind.WORKOUT:
                continue
            for level, ref in [(AggregationLevel.DAY, date(2025, 5, 10)),
                               (AggregationLevel.WEEK, date(2025, 5, 14)),
                               (AggregationLevel.MONTH, date(2025, 5, 20))]:
                result = query_health_data(store, "u", AggregationQuery(kind, ref, level))
                expected = brute_force_aggregate(raw, kind.value,
                                                 [b.period_start for b in result.buckets])
                assert [b.value for b in result.buckets] == pytest.approx(expected), (kind, level)


class TestReferenceDates:
    NOW = datetime(2025, 5, 10, 14, 0)  # a Saturday

    def test_today(self):
        assert parse_reference_date("today", self.NOW) == date(2025, 5, 10)

    def test_yesterday(self):
        assert parse_reference_date("yesterday", self.NOW) == date(2025, 5, 9)

    def test_this_week_resolves_to_monday(self):
        assert parse_reference_date("this week", self.NOW) == date(2025, 5, 5)

    def test_last_week(self):
        assert parse_reference_date("last week", self.NOW) == date(2025, 4, 28)

    def test_this_month(self):
        assert parse_reference_date("this month", self.NOW) == date(2025, 5, 1)

    def test_last_month(self):
        assert parse_reference_date("last month", self.NOW) == date(2025, 4, 1)

    def test_iso_date(self):
        assert parse_reference_date("2025-05-01", self.NOW) == date(2025, 5, 1)

    def test_iso_datetime(self):
        assert parse_reference_date("2025-05-01T08:30:00", self.NOW) == date(2025, 5, 1)

    def test_case_and_whitespace_tolerant(self):
        assert parse_reference_date("  Last   Week ", self.NOW) == date(2025, 4, 28)

    def test_gibberish_raises(self):
        with pytest.raises(ReferenceDateError):
            parse_reference_date("banana", self.NOW)


class TestGuideline:
    def _store_with_minutes(self, minutes: float) -> HealthStore:
        store = HealthStore()
        if minutes:
            store.ingest("u", [sample(kind="exerciseTime", value=minutes,
                                      start="2025-05-06T08:00:00")])
        return store

    @pytest.mark.parametrize("minutes,meets", [(0, False), (149, False), (150, True), (160, True)])
    def test_guideline_boundaries(self, minutes, meets):
        store = self._store_with_minutes(minutes)
        result = weekly_guideline_minutes(store, "u", date(2025, 5, 5))
        assert result.minutes == minutes
        assert result.meets_guideline is meets

    def test_sums_across_days_within_week_only(self):
        store = HealthStore()
        store.ingest("u", [
            sample(kind="exerciseTime", value=60, start="2025-05-05T08:00:00"),
            sample(kind="exerciseTime", value=50, start="2025-05-09T08:00:00"),
            sample(kind="exerciseTime", value=45, start="2025-05-12T08:00:00"),  # next week
        ])
        assert weekly_guideline_minutes(store, "u", date(2025, 5, 5)).minutes == 110
