"""Home/Away occupancy and the fleet savings of Long Sleep while residents are out."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .energy import Period
from .errors import ScheduleOverlap, UndefinedWeight, ValidationError

_logger = logging.getLogger(__name__)

MINUTES_PER_DAY = 24 * 60
HOURS_PER_DAY = 24.0
WEEKDAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


def parse_clock(text: str) -> int:
    """Minutes after midnight for "HH:MM"; "24:00" is the end of the day."""
    try:
        hours, minutes = (int(part) for part in str(text).strip().split(":"))
    except ValueError:
        raise ValidationError("time", text, "expected HH:MM") from None
    total = hours * 60 + minutes
    if not (0 <= minutes < 60 and 0 <= total <= MINUTES_PER_DAY):
        raise ValidationError("time", text, "outside 00:00..24:00")
    return total


def format_clock(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_weekdays(days: Optional[Iterable[str]]) -> FrozenSet[str]:
    if days is None:
        return frozenset(WEEKDAYS)
    parsed = set()
    for day in days:
        key = str(day).strip().lower()[:3]
        if key not in WEEKDAYS:
            raise ValidationError("weekdays", day, f"expected one of {', '.join(WEEKDAYS)}")
        parsed.add(key)
    return frozenset(parsed)


@dataclass(frozen=True)
class DaySchedule:
    exit_time: int
    entry_time: int
    weekdays: FrozenSet[str] = frozenset(WEEKDAYS)

    def __post_init__(self) -> None:
        for name in ("exit_time", "entry_time"):
            value = getattr(self, name)
            if not 0 <= value <= MINUTES_PER_DAY:
                raise ValidationError(name, value, "outside the day")
        if self.exit_time % MINUTES_PER_DAY == self.entry_time % MINUTES_PER_DAY:
            raise ValidationError("entry_time", format_clock(self.entry_time), "equals exit time")

    @classmethod
    def parse(cls, exit_time: str, entry_time: str, weekdays: Optional[Iterable[str]] = None) -> "DaySchedule":
        return cls(parse_clock(exit_time), parse_clock(entry_time), parse_weekdays(weekdays))

    def intervals(self) -> List[Tuple[int, int]]:
        """Away intervals in minutes within one day, split at midnight."""
        if self.entry_time > self.exit_time:
            return [(self.exit_time, self.entry_time)]
        pieces = [(self.exit_time, MINUTES_PER_DAY), (0, self.entry_time)]
        return [(start, end) for start, end in pieces if end > start]

    def __str__(self) -> str:
        return f"{format_clock(self.exit_time)}-{format_clock(self.entry_time)}"


def away_intervals(schedules: Sequence[DaySchedule]) -> List[Tuple[int, int]]:
    """Sorted away intervals of one representative day; overlapping schedules are rejected."""
    tagged = sorted((start, end, str(schedule))
                    for schedule in schedules for start, end in schedule.intervals())
    for (_, end, first), (start, _, second) in zip(tagged, tagged[1:]):
        if start < end:
            raise ScheduleOverlap(first, second)
    return [(start, end) for start, end, _ in tagged]


def away_time(schedules: Sequence[DaySchedule]) -> float:
    """Daily hours away from home."""
    return sum(end - start for start, end in away_intervals(schedules)) / 60.0


def home_time(schedules: Sequence[DaySchedule]) -> float:
    return HOURS_PER_DAY - away_time(schedules)


@dataclass(frozen=True)
class OccupancyGroup:
    name: str
    apartment_count: int
    schedules: Tuple[DaySchedule, ...] = ()
    away_hours_override: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "schedules", tuple(self.schedules))
        if self.apartment_count < 0:
            raise ValidationError(f"{self.name}.apartment_count", self.apartment_count, "must be >= 0")
        away = self.away_hours
        if not 0.0 <= away <= HOURS_PER_DAY:
            raise ValidationError(f"{self.name}.away_hours", away, "must be within [0, 24]")
        if self.away_hours_override is not None and self.schedules:
            derived = self.interval_away_hours
            if not math.isclose(derived, self.away_hours_override, abs_tol=1e-9):
                _logger.warning("group %s: schedules give %.2f h away, using override %.2f h",
                                self.name, derived, self.away_hours_override)

    @property
    def interval_away_hours(self) -> float:
        return away_time(self.schedules)

    @property
    def away_hours(self) -> float:
        if self.away_hours_override is not None:
            return float(self.away_hours_override)
        return self.interval_away_hours

    @property
    def home_hours(self) -> float:
        return HOURS_PER_DAY - self.away_hours

    @property
    def away_pct(self) -> float:
        return 100.0 * self.away_hours / HOURS_PER_DAY

    @property
    def home_pct(self) -> float:
        return 100.0 * self.home_hours / HOURS_PER_DAY

    @property
    def total_away_hours(self) -> float:
        return self.apartment_count * self.away_hours

    @property
    def total_home_hours(self) -> float:
        return self.apartment_count * self.home_hours


def ls_savings(active_s: float, ls_s: float) -> float:
    """Savings of a Long Sleep cycle against no sleep, in percent; queue delay is ignored."""
    if ls_s < 0:
        raise ValidationError("ls_s", ls_s, "must be >= 0")
    return 100.0 * ls_s / (active_s + ls_s)


def group_daily_savings(home_pct: float, away_pct: float, t_savings_pct: float,
                        ls_savings_pct: float) -> float:
    """Daily savings of one group: home share at T savings plus away share at LS savings."""
    if not math.isclose(home_pct + away_pct, 100.0, abs_tol=0.05):
        raise ValidationError("home_pct + away_pct", home_pct + away_pct, "must be 100")
    return (home_pct / 100.0) * t_savings_pct + (away_pct / 100.0) * ls_savings_pct


@dataclass(frozen=True)
class GroupSavings:
    name: str
    apartments: int
    total_away_hours: float
    total_home_hours: float
    weight_pct: float
    savings_pct: float
    extra_savings_pct: float


@dataclass(frozen=True)
class ConsumptionDelta:
    consumption_kwh: float
    vs_t_only_kwh: float
    vs_baseline_kwh: float


@dataclass(frozen=True)
class SavingsBreakdown:
    ls_s: float
    t_savings_pct: float
    groups: Tuple[GroupSavings, ...]
    savings_pct: float
    extra_savings_pct: float
    deltas: Mapping[Period, ConsumptionDelta] = field(default_factory=dict)

    @property
    def apartments(self) -> int:
        return sum(group.apartments for group in self.groups)

    @property
    def total_away_hours(self) -> float:
        return math.fsum(group.total_away_hours for group in self.groups)

    @property
    def total_home_hours(self) -> float:
        return math.fsum(group.total_home_hours for group in self.groups)


def consumption_deltas(baseline_kwh: Mapping[Period, float], t_savings_pct: float,
                       savings_pct: float) -> Dict[Period, ConsumptionDelta]:
    """Fleet consumption at a savings level, and its differences to T-only and baseline operation."""
    deltas = {}
    for period, baseline in baseline_kwh.items():
        t_only = baseline * (1.0 - t_savings_pct / 100.0)
        consumption = baseline * (1.0 - savings_pct / 100.0)
        deltas[Period.parse(period)] = ConsumptionDelta(consumption, t_only - consumption,
                                                        baseline - consumption)
    return deltas


def condominium_savings(groups: Sequence[OccupancyGroup], t_savings_pct: float, ls_s: float,
                        active_s: float = 2.0,
                        baseline_kwh: Optional[Mapping[Period, float]] = None) -> SavingsBreakdown:
    """Fleet savings with groups weighted by their share of the total away time."""
    if not groups:
        raise ValidationError("groups", groups, "needs at least one group")
    total_away = math.fsum(group.total_away_hours for group in groups)
    if total_away <= 0:
        raise UndefinedWeight()
    ls_pct = ls_savings(active_s, ls_s)
    rows = []
    for group in groups:
        weight = 100.0 * group.total_away_hours / total_away
        savings = group_daily_savings(group.home_pct, group.away_pct, t_savings_pct, ls_pct)
        rows.append(GroupSavings(group.name, group.apartment_count, group.total_away_hours,
                                 group.total_home_hours, weight, savings, savings - t_savings_pct))
    total = math.fsum(row.savings_pct * row.weight_pct / 100.0 for row in rows)
    extra = math.fsum(row.extra_savings_pct * row.weight_pct / 100.0 for row in rows)
    deltas = consumption_deltas(baseline_kwh, t_savings_pct, total) if baseline_kwh else {}
    return SavingsBreakdown(ls_s, t_savings_pct, tuple(rows), total, extra, deltas)


def ls_sweep(groups: Sequence[OccupancyGroup], t_savings_pct: float, ls_values: Iterable[float],
             active_s: float = 2.0,
             baseline_kwh: Optional[Mapping[Period, float]] = None) -> List[SavingsBreakdown]:
    values = list(ls_values)
    if not values:
        raise ValidationError("ls_values", values, "needs at least one value")
    return [condominium_savings(groups, t_savings_pct, ls, active_s, baseline_kwh) for ls in values]
