import logging

import pytest
from hypothesis import given, strategies as st

from fogduty.errors import ScheduleOverlap, UndefinedWeight, ValidationError
from fogduty.schedule import (DaySchedule, OccupancyGroup, away_intervals, away_time, condominium_savings,
                              consumption_deltas, group_daily_savings, home_time, ls_savings, ls_sweep,
                              parse_clock, parse_weekdays)


class TestClock:

    @pytest.mark.parametrize("text, minutes", [("00:00", 0), ("08:30", 510), ("24:00", 1440)])
    def test_parse(self, text, minutes):
        assert parse_clock(text) == minutes

    @pytest.mark.parametrize("text", ["24:01", "12:60", "7", "ab:cd"])
    def test_invalid(self, text):
        with pytest.raises(ValidationError):
            parse_clock(text)

    def test_weekdays(self):
        assert parse_weekdays(["Monday", "sat"]) == {"mon", "sat"}
        with pytest.raises(ValidationError):
            parse_weekdays(["someday"])


class TestIntervals:

    def test_midnight_wraps(self):
        schedule = DaySchedule.parse("22:00", "06:00")
        assert schedule.intervals() == [(1320, 1440), (0, 360)]
        assert away_time([schedule]) == 8.0
        assert home_time([schedule]) == 16.0

    def test_same_exit_and_entry(self):
        with pytest.raises(ValidationError):
            DaySchedule.parse("08:00", "08:00")

    def test_overlap(self):
        with pytest.raises(ScheduleOverlap):
            away_intervals([DaySchedule.parse("08:00", "12:00"), DaySchedule.parse("11:00", "13:00")])

    def test_touching_intervals(self):
        schedules = [DaySchedule.parse("17:00", "24:00"), DaySchedule.parse("00:00", "05:00")]
        assert away_time(schedules) == 12.0


class TestGroups:

    def test_reference_away_hours(self, groups):
        assert [g.away_hours for g in groups] == [9.5, 7.5, 7.0, 8.0, 12.0]
        assert [round(g.away_pct, 2) for g in groups] == [39.58, 31.25, 29.17, 33.33, 50.0]

    def test_schedules_match_totals(self, groups):
        for group in groups:
            if group.name not in ("1", "2"):
                assert group.interval_away_hours == pytest.approx(group.away_hours)

    def test_override_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger="fogduty.schedule"):
            group = OccupancyGroup("2", 40, (DaySchedule.parse("06:00", "13:00"),), 7.5)
        assert group.away_hours == 7.5
        assert "using override" in caplog.text

    def test_negative_apartments(self):
        with pytest.raises(ValidationError):
            OccupancyGroup("x", -1, away_hours_override=1)

    def test_away_hours_range(self):
        with pytest.raises(ValidationError):
            OccupancyGroup("x", 1, away_hours_override=25)


class TestSavings:

    def test_ls_savings(self):
        assert ls_savings(2, 4) == pytest.approx(200 / 3)
        with pytest.raises(ValidationError):
            ls_savings(2, -1)

    def test_group_daily_savings_needs_full_day(self):
        with pytest.raises(ValidationError):
            group_daily_savings(50, 40, 58.4, 66.7)

    def test_condominium(self, groups):
        breakdown = condominium_savings(groups, 58.4, 4)
        assert breakdown.savings_pct == pytest.approx(61.51, abs=0.01)
        assert breakdown.extra_savings_pct == pytest.approx(3.11, abs=0.01)
        assert breakdown.apartments == 300
        assert breakdown.total_away_hours == pytest.approx(2655)
        assert breakdown.total_home_hours == pytest.approx(4545)
        assert sum(g.weight_pct for g in breakdown.groups) == pytest.approx(100)
        expected = [61.67, 60.98, 60.81, 61.15, 62.53]
        assert [g.savings_pct for g in breakdown.groups] == pytest.approx(expected, abs=0.01)

    def test_long_sleep_saturates(self, groups):
        low, high = ls_sweep(groups, 58.4, [28, 58])
        assert high.extra_savings_pct - low.extra_savings_pct == pytest.approx(1.26, abs=0.01)
        assert high.savings_pct > low.savings_pct

    def test_zero_away_time(self):
        with pytest.raises(UndefinedWeight):
            condominium_savings([OccupancyGroup("x", 0, away_hours_override=5)], 58.4, 4)

    def test_needs_groups(self):
        with pytest.raises(ValidationError):
            condominium_savings([], 58.4, 4)
        with pytest.raises(ValidationError):
            ls_sweep([OccupancyGroup("x", 1, away_hours_override=5)], 58.4, [])

    def test_consumption_deltas(self):
        deltas = consumption_deltas({"year": 2536.22}, 58.4, 61.51)
        (period, delta), = deltas.items()
        assert period.value == "year"
        assert delta.consumption_kwh == pytest.approx(976.19, abs=0.01)
        assert delta.vs_t_only_kwh == pytest.approx(78.88, abs=0.01)
        assert delta.vs_baseline_kwh == pytest.approx(1560.03, abs=0.01)


@given(st.floats(0, 100), st.floats(0.5, 50))
def test_long_sleep_returns_diminish(ls_s, step):
    first = ls_savings(2, ls_s + step) - ls_savings(2, ls_s)
    second = ls_savings(2, ls_s + 2 * step) - ls_savings(2, ls_s + step)
    assert 0 < second <= first + 1e-9


@given(st.lists(st.tuples(st.integers(1, 200), st.floats(0.5, 23.5)), min_size=1, max_size=6),
       st.floats(0, 70), st.floats(0, 100))
def test_condominium_lies_between_its_groups(rows, t_savings_pct, ls_s):
    groups = [OccupancyGroup(str(i), count, away_hours_override=hours) for i, (count, hours) in enumerate(rows)]
    breakdown = condominium_savings(groups, t_savings_pct, ls_s)
    per_group = [g.savings_pct for g in breakdown.groups]
    assert min(per_group) - 1e-9 <= breakdown.savings_pct <= max(per_group) + 1e-9


def test_equal_savings_blend_to_themselves(groups):
    t_savings_pct = ls_savings(2, 4)
    breakdown = condominium_savings(groups, t_savings_pct, 4)
    assert breakdown.savings_pct == pytest.approx(t_savings_pct, rel=1e-9)
    assert breakdown.extra_savings_pct == pytest.approx(0, abs=1e-9)
