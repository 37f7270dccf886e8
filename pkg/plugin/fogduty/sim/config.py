from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple, Union

from ..energy import DeviceProfile
from ..errors import ValidationError
from ..protocol.frames import MAX_REGULAR_SLEEP
from ..queueing import LinkSpec, QueueModel, arrival_rate, tandem_combined
from ..schedule import OccupancyGroup

DEFAULT_HORIZON_S = 10_000.0
# Send-mode time of the radio at the end of each active period.
TRANSMIT_S = 0.0008


class ArrivalModel(str, Enum):
    POISSON_APPROX = "poisson"
    DETERMINISTIC_CYCLE = "deterministic"


class ServiceModel(str, Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class EmergencyScenario:
    start_s: float
    duration_s: float
    affected: Union[str, Tuple[int, ...]] = (0,)

    def __post_init__(self) -> None:
        if self.start_s < 0:
            raise ValidationError("emergency.start_s", self.start_s, "must be >= 0")
        if not self.duration_s > 0:
            raise ValidationError("emergency.duration_s", self.duration_s, "must be > 0")
        if isinstance(self.affected, str):
            if self.affected != "all":
                raise ValidationError("emergency.affected", self.affected, "expected 'all' or device indices")
        else:
            object.__setattr__(self, "affected", tuple(int(i) for i in self.affected))
            if not self.affected:
                raise ValidationError("emergency.affected", self.affected, "names no device")

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s

    def devices(self, fleet_size: int) -> Tuple[int, ...]:
        if self.affected == "all":
            return tuple(range(fleet_size))
        return tuple(i for i in self.affected if 0 <= i < fleet_size)


@dataclass(frozen=True)
class SimConfig:
    fleet_size: int
    regular_profile: DeviceProfile
    emergency_profile: DeviceProfile
    active_s: float = 2.0
    sleep_s: float = 0.0
    long_sleep_s: float = 4.0
    emergency_active_s: float = 1.0
    arrival_model: ArrivalModel = ArrivalModel.POISSON_APPROX
    service_model: ServiceModel = ServiceModel.EXPONENTIAL
    link: LinkSpec = field(default_factory=LinkSpec)
    stage_packet_bytes: Tuple[float, ...] = (25.0,)
    feedback_fraction: float = 0.0
    emergency: Optional[EmergencyScenario] = None
    groups: Tuple[OccupancyGroup, ...] = ()
    seed: int = 0
    horizon_s: float = DEFAULT_HORIZON_S
    transmit_s: float = TRANSMIT_S

    def __post_init__(self) -> None:
        object.__setattr__(self, "arrival_model", ArrivalModel(self.arrival_model))
        object.__setattr__(self, "service_model", ServiceModel(self.service_model))
        object.__setattr__(self, "stage_packet_bytes", tuple(float(b) for b in self.stage_packet_bytes))
        object.__setattr__(self, "groups", tuple(self.groups))
        if self.fleet_size < 0:
            raise ValidationError("simulation.fleet_size", self.fleet_size, "must be >= 0")
        if not self.horizon_s > 0:
            raise ValidationError("simulation.horizon_s", self.horizon_s, "must be > 0")
        if not 0 <= self.sleep_s <= MAX_REGULAR_SLEEP:
            raise ValidationError("simulation.sleep_s", self.sleep_s,
                                  f"regular sleep must be within [0, {MAX_REGULAR_SLEEP}]")
        if not 0 < self.transmit_s < min(self.active_s, self.emergency_active_s):
            raise ValidationError("simulation.transmit_s", self.transmit_s, "must fit in the active period")
        if self.long_sleep_s < 0:
            raise ValidationError("simulation.long_sleep_s", self.long_sleep_s, "must be >= 0")
        if not 0.0 <= self.feedback_fraction < 1.0:
            raise ValidationError("simulation.feedback_fraction", self.feedback_fraction, "must be within [0, 1)")
        if self.emergency is not None and self.emergency.start_s >= self.horizon_s:
            raise ValidationError("emergency.start_s", self.emergency.start_s, "must fall within the horizon")
        if self.emergency is not None and self.fleet_size and not self.emergency.devices(self.fleet_size):
            raise ValidationError("emergency.affected", self.emergency.affected,
                                  f"no index falls within the fleet of {self.fleet_size}")
        if sum(group.apartment_count for group in self.groups) > self.fleet_size:
            raise ValidationError("simulation.groups", len(self.groups), "more apartments than devices")

    @property
    def cycle_s(self) -> float:
        return self.active_s + self.sleep_s

    def queue_model(self) -> QueueModel:
        """Analytic counterpart of the configured coordinator."""
        lam = arrival_rate(self.fleet_size, self.cycle_s)
        return tandem_combined(lam, self.stage_packet_bytes, self.link, self.feedback_fraction)

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=seed)

    def replace(self, **changes) -> "SimConfig":
        return replace(self, **changes)
