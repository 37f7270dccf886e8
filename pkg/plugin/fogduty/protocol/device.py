"""Device-side handling of control messages."""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from ..energy import DutyCycle, Mode
from ..errors import RegulatoryViolation, ValidationError
from .frames import AlarmValue, ControlKind, ControlMessage, MAX_REGULAR_SLEEP, ModeValue

REGULAR_ACTIVE_S = 2.0
EMERGENCY_ACTIVE_S = 1.0
DEFAULT_LONG_SLEEP_S = 4.0


class DeviceMode(str, Enum):
    REGULAR = "regular"
    EMERGENCY = "emergency"
    AWAY = "away"


_ENERGY_MODE = {
    DeviceMode.REGULAR: Mode.REGULAR,
    DeviceMode.EMERGENCY: Mode.EMERGENCY,
    DeviceMode.AWAY: Mode.LONG_SLEEP,
}


@dataclass(frozen=True)
class DeviceState:
    mode: DeviceMode = DeviceMode.REGULAR
    sleep_s: float = float(MAX_REGULAR_SLEEP)
    alarm_on: bool = False
    sensors_on: bool = True
    regular_sleep_s: float = float(MAX_REGULAR_SLEEP)
    long_sleep_s: float = DEFAULT_LONG_SLEEP_S

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", DeviceMode(self.mode))
        if self.sleep_s < 0:
            raise ValidationError("sleep_s", self.sleep_s, "must be >= 0")
        if self.regular_sleep_s > MAX_REGULAR_SLEEP:
            raise RegulatoryViolation(REGULAR_ACTIVE_S + self.regular_sleep_s,
                                      REGULAR_ACTIVE_S + MAX_REGULAR_SLEEP)
        if self.mode is DeviceMode.REGULAR and self.sleep_s > MAX_REGULAR_SLEEP:
            raise RegulatoryViolation(REGULAR_ACTIVE_S + self.sleep_s,
                                      REGULAR_ACTIVE_S + MAX_REGULAR_SLEEP)
        if self.mode is DeviceMode.EMERGENCY and (self.sleep_s != 0 or not self.alarm_on):
            raise ValidationError("mode", self.mode.value, "emergency runs a 1 s cycle with alarms on")

    @classmethod
    def regular(cls, sleep_s: float = float(MAX_REGULAR_SLEEP),
                long_sleep_s: float = DEFAULT_LONG_SLEEP_S) -> "DeviceState":
        return cls(DeviceMode.REGULAR, sleep_s, False, True, sleep_s, long_sleep_s)


def _enter(state: DeviceState, mode: DeviceMode, long_sleep_s: float | None = None) -> DeviceState:
    if mode is DeviceMode.REGULAR:
        return replace(state, mode=mode, sleep_s=state.regular_sleep_s, alarm_on=False, sensors_on=True)
    if mode is DeviceMode.EMERGENCY:
        return replace(state, mode=mode, sleep_s=0.0, alarm_on=True, sensors_on=True)
    ls = state.long_sleep_s if long_sleep_s is None else long_sleep_s
    return replace(state, mode=mode, sleep_s=ls, long_sleep_s=ls)


def apply_control(state: DeviceState, msg: ControlMessage) -> DeviceState:
    """State after the device executes one control message."""
    if msg.kind is ControlKind.ALARM:
        on = msg.value == AlarmValue.ON
        if state.mode is DeviceMode.EMERGENCY and not on:
            return _enter(state, DeviceMode.REGULAR)
        return replace(state, alarm_on=on)
    if msg.kind is ControlKind.SLEEP_TIME:
        # values above the regular cap never decode, see ControlMessage
        seconds = float(msg.value)
        if state.mode is DeviceMode.REGULAR:
            return replace(state, sleep_s=seconds, regular_sleep_s=seconds)
        return replace(state, regular_sleep_s=seconds)
    if msg.kind is ControlKind.LONG_SLEEP:
        if state.mode is DeviceMode.EMERGENCY:
            return replace(state, long_sleep_s=float(msg.value))
        return _enter(state, DeviceMode.AWAY, float(msg.value))
    return _enter(state, {
        ModeValue.REGULAR: DeviceMode.REGULAR,
        ModeValue.EMERGENCY: DeviceMode.EMERGENCY,
        ModeValue.AWAY: DeviceMode.AWAY,
    }[ModeValue(msg.value)])


def canonical_duty(state: DeviceState, active_s: float = REGULAR_ACTIVE_S,
                   emergency_active_s: float = EMERGENCY_ACTIVE_S) -> DutyCycle:
    """Duty cycle the device runs in `state`."""
    if state.mode is DeviceMode.EMERGENCY:
        return DutyCycle(emergency_active_s, 0.0, Mode.EMERGENCY)
    return DutyCycle(active_s, state.sleep_s, _ENERGY_MODE[state.mode])
