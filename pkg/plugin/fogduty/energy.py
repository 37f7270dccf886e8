"""Duty-cycle energy model for battery or mains powered IoT devices.

Charge per cycle is the sum of each module's per-second charge times the seconds
it is on. Sleep-mode modules are charged for the whole sleep interval. Energy per
cycle is that charge times the supply voltage, in mWh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .errors import InvalidPeriod, RegulatoryViolation, ValidationError

SECONDS_PER_HOUR = 3600.0
MWH_PER_KWH = 1e6
# Per-second charge is printed to three significant figures; MQ-2 and Flames rows sit at the bound.
CS_REL_TOLERANCE = 1e-3 + 1e-12
REGULATORY_LIMIT_S = 5.0


class Mode(str, Enum):
    REGULAR = "regular"
    EMERGENCY = "emergency"
    LONG_SLEEP = "long_sleep"


class Period(str, Enum):
    MINUTE = "minute"
    HOUR = "hour"
    DAY = "day"
    MONTH = "month"
    YEAR = "year"

    @classmethod
    def parse(cls, value: "str | Period") -> "Period":
        try:
            return cls(value)
        except ValueError:
            raise InvalidPeriod(value) from None


@dataclass(frozen=True)
class Calendar:
    days_per_month: float = 30.0
    months_per_year: float = 12.0

    def __post_init__(self) -> None:
        if self.days_per_month <= 0 or self.months_per_year <= 0:
            raise ValidationError("calendar", (self.days_per_month, self.months_per_year),
                                  "calendar lengths must be positive")

    def seconds(self, period: "str | Period") -> float:
        period = Period.parse(period)
        day = 86400.0
        return {
            Period.MINUTE: 60.0,
            Period.HOUR: 3600.0,
            Period.DAY: day,
            Period.MONTH: day * self.days_per_month,
            Period.YEAR: day * self.days_per_month * self.months_per_year,
        }[period]


DEFAULT_CALENDAR = Calendar()


def _non_negative(name: str, value: float) -> None:
    if value < 0 or math.isnan(value):
        raise ValidationError(name, value, "must be >= 0")


@dataclass(frozen=True)
class ModuleSpec:
    name: str
    current_active_ma: float
    current_per_second_mah: float
    response_time_s: float = 0.0

    def __post_init__(self) -> None:
        _non_negative(f"{self.name}.current_active_ma", self.current_active_ma)
        _non_negative(f"{self.name}.current_per_second_mah", self.current_per_second_mah)
        _non_negative(f"{self.name}.response_time_s", self.response_time_s)
        derived = self.current_active_ma / SECONDS_PER_HOUR
        if abs(self.current_per_second_mah - derived) > CS_REL_TOLERANCE * derived + 1e-15:
            raise ValidationError(
                f"{self.name}.current_per_second_mah", self.current_per_second_mah,
                f"does not match {self.current_active_ma} mA / 3600 = {derived:.4g}")

    @classmethod
    def from_current(cls, name: str, current_active_ma: float, response_time_s: float = 0.0) -> "ModuleSpec":
        return cls(name, current_active_ma, current_active_ma / SECONDS_PER_HOUR, response_time_s)

    @property
    def charge_mah(self) -> float:
        return self.current_per_second_mah * self.response_time_s

    def with_response_time(self, response_time_s: float) -> "ModuleSpec":
        return ModuleSpec(self.name, self.current_active_ma, self.current_per_second_mah, response_time_s)


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    modules: Tuple[ModuleSpec, ...]
    voltage_v: float
    sleep_modules: Tuple[ModuleSpec, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "modules", tuple(self.modules))
        object.__setattr__(self, "sleep_modules", tuple(self.sleep_modules))
        _non_negative(f"{self.name}.voltage_v", self.voltage_v)

    @property
    def active_charge_mah(self) -> float:
        return math.fsum(module.charge_mah for module in self.modules)

    @property
    def sleep_charge_per_second_mah(self) -> float:
        return math.fsum(module.current_per_second_mah for module in self.sleep_modules)

    def module(self, name: str) -> ModuleSpec:
        for module in self.modules + self.sleep_modules:
            if module.name == name:
                return module
        raise KeyError(name)


@dataclass(frozen=True)
class DutyCycle:
    active_s: float
    sleep_s: float = 0.0
    mode: Mode = Mode.REGULAR

    def __post_init__(self) -> None:
        if not self.active_s > 0:
            raise ValidationError("duty.active_s", self.active_s, "must be > 0")
        _non_negative("duty.sleep_s", self.sleep_s)
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def cycle_s(self) -> float:
        return self.active_s + self.sleep_s

    @property
    def sleep_fraction(self) -> float:
        return self.sleep_s / self.cycle_s

    def check_regulatory(self, limit_s: Optional[float] = REGULATORY_LIMIT_S) -> "DutyCycle":
        """Reject regular cycles longer than the response-time limit; None disables the check."""
        if limit_s is not None and self.mode is Mode.REGULAR and self.cycle_s > limit_s + 1e-12:
            raise RegulatoryViolation(self.cycle_s, limit_s)
        return self


@dataclass(frozen=True)
class ConsumptionReport:
    charge_per_cycle_mah: float
    energy_per_cycle_mwh: float
    kwh_per: Mapping[Period, float]
    savings_pct: Optional[float] = None
    baseline: Optional[str] = None
    fleet_size: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kwh_per", dict(self.kwh_per))


def cycle_energy(profile: DeviceProfile, duty: DutyCycle) -> float:
    """Charge drawn over one duty cycle, in mAh."""
    return profile.active_charge_mah + profile.sleep_charge_per_second_mah * duty.sleep_s


def cycle_power(charge_mah: float, voltage_v: float) -> float:
    """Energy of one cycle in mWh (charge in mAh times volts)."""
    _non_negative("charge_mah", charge_mah)
    _non_negative("voltage_v", voltage_v)
    return charge_mah * voltage_v


def consumption_rate(profile: DeviceProfile, duty: DutyCycle) -> float:
    """Average draw of one device in mWh per second."""
    return cycle_power(cycle_energy(profile, duty), profile.voltage_v) / duty.cycle_s


def consumption_over(profile: DeviceProfile, duty: DutyCycle, period: "str | Period",
                     fleet_size: int = 1, calendar: Calendar = DEFAULT_CALENDAR) -> float:
    """Energy of `fleet_size` devices over one calendar period, in kWh."""
    if fleet_size < 0:
        raise ValidationError("fleet_size", fleet_size, "must be >= 0")
    if duty.cycle_s == 0:
        raise ZeroDivisionError("cycle length is zero")
    cycles = calendar.seconds(period) / duty.cycle_s
    return cycles * cycle_power(cycle_energy(profile, duty), profile.voltage_v) * fleet_size / MWH_PER_KWH


def savings_vs_baseline(duty_a: DutyCycle, duty_b: DutyCycle, profile: DeviceProfile) -> float:
    """Percent saved by running `duty_a` instead of `duty_b`."""
    baseline = consumption_rate(profile, duty_b)
    if baseline <= 0:
        raise ValidationError("baseline", baseline, "baseline consumption must be > 0")
    return 100.0 * (1.0 - consumption_rate(profile, duty_a) / baseline)


def _blended_rate(regular_profile: DeviceProfile, regular_duty: DutyCycle,
                  emergency_profile: DeviceProfile, emergency_duty: DutyCycle,
                  emergency_fraction: float) -> float:
    if not 0.0 <= emergency_fraction <= 1.0:
        raise ValidationError("emergency_fraction", emergency_fraction, "must be within [0, 1]")
    return ((1.0 - emergency_fraction) * consumption_rate(regular_profile, regular_duty)
            + emergency_fraction * consumption_rate(emergency_profile, emergency_duty))


def mixed_mode_savings(regular_duty: DutyCycle, emergency_fraction: float, *,
                       regular_profile: DeviceProfile, emergency_profile: DeviceProfile,
                       emergency_duty: Optional[DutyCycle] = None,
                       baseline: Optional[DutyCycle] = None) -> float:
    """Savings vs the no-sleep baseline when a share of the time is spent in Emergency mode."""
    emergency_duty = emergency_duty or DutyCycle(1.0, 0.0, Mode.EMERGENCY)
    baseline = baseline or DutyCycle(regular_duty.active_s, 0.0)
    rate = _blended_rate(regular_profile, regular_duty, emergency_profile, emergency_duty,
                         emergency_fraction)
    return 100.0 * (1.0 - rate / consumption_rate(regular_profile, baseline))


@dataclass(frozen=True)
class MixedConsumption:
    emergency_fraction: float
    energy_per_cycle_mwh: float
    kwh_per: Mapping[Period, float]
    savings_pct: float


def mixed_consumption(regular_duty: DutyCycle, emergency_fraction: float, *,
                      regular_profile: DeviceProfile, emergency_profile: DeviceProfile,
                      fleet_size: int = 1, emergency_duty: Optional[DutyCycle] = None,
                      baseline: Optional[DutyCycle] = None,
                      calendar: Calendar = DEFAULT_CALENDAR) -> MixedConsumption:
    """Fleet row for an emergency share: blended cycle energy, kWh per period, savings."""
    emergency_duty = emergency_duty or DutyCycle(1.0, 0.0, Mode.EMERGENCY)
    rate = _blended_rate(regular_profile, regular_duty, emergency_profile, emergency_duty,
                         emergency_fraction)
    regular_cycle = cycle_power(cycle_energy(regular_profile, regular_duty), regular_profile.voltage_v)
    emergency_cycle = cycle_power(cycle_energy(emergency_profile, emergency_duty), emergency_profile.voltage_v)
    blended_cycle = (1.0 - emergency_fraction) * regular_cycle + emergency_fraction * emergency_cycle
    return MixedConsumption(
        emergency_fraction=emergency_fraction,
        energy_per_cycle_mwh=blended_cycle * fleet_size,
        kwh_per={p: rate * calendar.seconds(p) * fleet_size / MWH_PER_KWH for p in Period},
        savings_pct=mixed_mode_savings(regular_duty, emergency_fraction,
                                       regular_profile=regular_profile,
                                       emergency_profile=emergency_profile,
                                       emergency_duty=emergency_duty, baseline=baseline),
    )


def consumption_report(profile: DeviceProfile, duty: DutyCycle, fleet_size: int = 1,
                       baseline: Optional[DutyCycle] = None,
                       calendar: Calendar = DEFAULT_CALENDAR) -> ConsumptionReport:
    charge = cycle_energy(profile, duty)
    savings = None
    if baseline == duty:
        savings = 0.0
    elif baseline is not None:
        savings = savings_vs_baseline(duty, baseline, profile)
    return ConsumptionReport(
        charge_per_cycle_mah=charge,
        energy_per_cycle_mwh=cycle_power(charge, profile.voltage_v),
        kwh_per={p: consumption_over(profile, duty, p, fleet_size, calendar) for p in Period},
        savings_pct=savings,
        baseline=None if baseline is None else f"T={baseline.sleep_s:g}",
        fleet_size=fleet_size,
    )


@dataclass(frozen=True)
class EnergyModel:
    """A profile bound to a duty cycle; the shared formula for analytics and simulation."""
    profile: DeviceProfile
    duty: DutyCycle
    calendar: Calendar = field(default=DEFAULT_CALENDAR)

    @property
    def charge_per_cycle_mah(self) -> float:
        return cycle_energy(self.profile, self.duty)

    @property
    def energy_per_cycle_mwh(self) -> float:
        return cycle_power(self.charge_per_cycle_mah, self.profile.voltage_v)

    @property
    def rate_mwh_per_s(self) -> float:
        return self.energy_per_cycle_mwh / self.duty.cycle_s

    def consumption_over(self, period: "str | Period", fleet_size: int = 1) -> float:
        return consumption_over(self.profile, self.duty, period, fleet_size, self.calendar)

    def energy_over_mwh(self, seconds: float, fleet_size: int = 1) -> float:
        return self.rate_mwh_per_s * seconds * fleet_size


def kwh_per_period(rate_mwh_per_s: float, calendar: Calendar = DEFAULT_CALENDAR) -> Dict[Period, float]:
    return {p: rate_mwh_per_s * calendar.seconds(p) / MWH_PER_KWH for p in Period}


def sweep(profile: DeviceProfile, sleep_values: Iterable[float], active_s: float,
          fleet_size: int = 1, calendar: Calendar = DEFAULT_CALENDAR,
          regulatory_limit_s: Optional[float] = REGULATORY_LIMIT_S) -> Dict[float, ConsumptionReport]:
    """Consumption reports for each regular sleep value against the no-sleep baseline."""
    baseline = DutyCycle(active_s, 0.0)
    reports: Dict[float, ConsumptionReport] = {}
    for sleep_s in sleep_values:
        duty = DutyCycle(active_s, float(sleep_s)).check_regulatory(regulatory_limit_s)
        reports[sleep_s] = consumption_report(profile, duty, fleet_size, baseline, calendar)
    return reports


__all__ = [
    "Calendar", "ConsumptionReport", "DeviceProfile", "DutyCycle", "EnergyModel",
    "MixedConsumption", "Mode", "ModuleSpec", "Period",
    "consumption_over", "consumption_rate", "consumption_report", "cycle_energy",
    "cycle_power", "kwh_per_period", "mixed_consumption", "mixed_mode_savings",
    "savings_vs_baseline", "sweep",
]
