from typing import Any, Optional


class FogDutyError(Exception):
    """Base class for every error raised by fogduty."""


class ValidationError(FogDutyError):

    def __init__(self, field: str, value: Any, reason: str, message: Optional[str] = None):
        self.field = field
        self.value = value
        self.reason = reason
        super().__init__(message or f"{field}={value!r}: {reason}")


class RegulatoryViolation(ValidationError):

    def __init__(self, cycle_s: float, limit_s: float):
        self.cycle_s = cycle_s
        self.limit_s = limit_s
        super().__init__(
            "duty.cycle_s", cycle_s,
            f"regular cycle exceeds the {limit_s:g} s response limit")


class ConfigError(ValidationError):

    def __init__(self, path: str, reason: str, line: Optional[int] = None, value: Any = None):
        self.path = path
        self.line = line
        where = f"{path} (line {line})" if line else path
        super().__init__(path, value, reason, f"{where}: {reason}")


class InvalidPeriod(ValidationError):

    def __init__(self, period: Any):
        super().__init__("period", period, "unknown period")


class QueueUnstable(FogDutyError):

    def __init__(self, arrival_rate: float, service_rate: float):
        self.arrival_rate = arrival_rate
        self.service_rate = service_rate
        super().__init__(
            f"queue unstable: arrival rate {arrival_rate:.4g} pct/s "
            f">= effective service rate {service_rate:.4g} pct/s")


class InfeasibleSleep(FogDutyError):

    def __init__(self, budget_s: float):
        self.budget_s = budget_s
        super().__init__(f"no sleep time satisfies the {budget_s:g} s budget")


class ScheduleOverlap(FogDutyError):

    def __init__(self, first: str, second: str):
        self.first = first
        self.second = second
        super().__init__(f"schedules overlap: {first} and {second}")


class UndefinedWeight(FogDutyError):

    def __init__(self) -> None:
        super().__init__("total away time is zero, group weights are undefined")


class FrameError(FogDutyError):
    """Base class for wire codec failures."""


class InvalidIdentifier(FrameError):

    def __init__(self, found: int, expected: int):
        self.found = found
        self.expected = expected
        super().__init__(f"invalid identifier byte 0x{found:02x}, expected 0x{expected:02x}")


class TruncatedFrame(FrameError):

    def __init__(self, size: int, needed: int):
        self.size = size
        self.needed = needed
        super().__init__(f"buffer holds {size} bytes, frame needs {needed}")


class MalformedFrame(FrameError):

    def __init__(self, field: str, found: int, expected: int):
        self.field = field
        self.found = found
        self.expected = expected
        super().__init__(f"{field} is {found}, expected {expected}")


class ControlValueOutOfRange(FrameError):

    def __init__(self, kind: str, value: int):
        self.kind = kind
        self.value = value
        super().__init__(f"control value {value!r} out of range for kind {kind!r}")


class FrameLengthError(FrameError):

    def __init__(self, name: str, size: int, expected: int):
        self.size = size
        self.expected = expected
        super().__init__(f"{name} encoded to {size} bytes, expected {expected}")


class AddressNotFound(FogDutyError):

    def __init__(self, address: int):
        self.address = address
        super().__init__(f"address 0x{address:x} is not registered")


class AddressConflict(FogDutyError):

    def __init__(self, address: int):
        self.address = address
        super().__init__(f"address 0x{address:x} is already mapped")


class EmptySample(FogDutyError):

    def __init__(self, what: str):
        super().__init__(f"no samples for {what}")


class ConfigMismatch(FogDutyError):

    def __init__(self, field: str, report_value: Any, model_value: Any):
        self.field = field
        super().__init__(
            f"{field} differs: simulation used {report_value!r}, model has {model_value!r}")


class UnknownTable(FogDutyError):

    def __init__(self, name: str, known: list):
        self.name = name
        super().__init__(f"unknown table {name!r}; choose from {', '.join(known)}")
