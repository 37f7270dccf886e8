"""Configuration file loading.

One YAML document describes the device profiles, fleet, link, queue, schedule and
simulation sections. Every validation failure is reported as a ConfigError with
the dotted path of the field and the line it was read from.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar, Union

import yaml

from .energy import Calendar, DeviceProfile, ModuleSpec, REGULATORY_LIMIT_S
from .errors import ConfigError, ValidationError
from .queueing import LinkSpec
from .schedule import DaySchedule, OccupancyGroup
from .sim.config import ArrivalModel, EmergencyScenario, ServiceModel, SimConfig, TRANSMIT_S

_logger = logging.getLogger(__name__)

ENV_CONFIG = "FOGDUTY_CONFIG"
REFERENCE_CONFIG = "reference.yaml"
STAGES = ("fog", "mist")

T = TypeVar("T")
_MISSING = object()

# Cache for loaded configs, keyed by resolved path
_config_cache: Dict[str, "FogDutyConfig"] = {}


@dataclass(frozen=True)
class FleetSettings:
    size: int
    active_s: float
    sleep_values: Tuple[float, ...]
    regular_sleep_s: float
    emergency_active_s: float
    emergency_fractions: Tuple[float, ...]
    regulatory_limit_s: Optional[float] = REGULATORY_LIMIT_S
    calendar: Calendar = field(default_factory=Calendar)


@dataclass(frozen=True)
class LinkSettings:
    link: LinkSpec
    mist_stage_bytes: Tuple[float, ...]
    feedback_stage_bytes: Tuple[float, ...]


@dataclass(frozen=True)
class QueueSettings:
    feedback_fractions: Tuple[float, ...]
    budget_s: float = 3.0
    step_s: float = 0.01
    round_service_rate: bool = False


@dataclass(frozen=True)
class ScheduleSettings:
    t_sleep_s: float
    t_savings_pct: float
    ls_s: float
    ls_values: Tuple[float, ...]
    groups: Tuple[OccupancyGroup, ...]


@dataclass(frozen=True)
class SimulationSettings:
    arrival_model: ArrivalModel = ArrivalModel.POISSON_APPROX
    service_model: ServiceModel = ServiceModel.EXPONENTIAL
    stages: str = "fog"
    seed: int = 0
    horizon_s: float = 10_000.0
    sleep_s: float = 0.0
    long_sleep_s: float = 4.0
    feedback_fraction: float = 0.0
    transmit_s: float = TRANSMIT_S
    use_schedule: bool = False
    emergency: Optional[EmergencyScenario] = None


@dataclass(frozen=True)
class FogDutyConfig:
    source: str
    regular: DeviceProfile
    emergency: DeviceProfile
    fleet: FleetSettings
    link: LinkSettings
    queue: QueueSettings
    schedule: ScheduleSettings
    simulation: SimulationSettings

    def stage_bytes(self, stages: str) -> Tuple[float, ...]:
        """Packet size of each queue a report crosses."""
        if stages == "mist":
            return self.link.mist_stage_bytes
        return (self.link.link.packet_bytes,)

    def sim_config(self, **overrides: Any) -> SimConfig:
        sim = self.simulation
        values: Dict[str, Any] = dict(
            fleet_size=self.fleet.size,
            regular_profile=self.regular,
            emergency_profile=self.emergency,
            active_s=self.fleet.active_s,
            sleep_s=sim.sleep_s,
            long_sleep_s=sim.long_sleep_s,
            emergency_active_s=self.fleet.emergency_active_s,
            arrival_model=sim.arrival_model,
            service_model=sim.service_model,
            link=self.link.link,
            stage_packet_bytes=self.stage_bytes(sim.stages),
            feedback_fraction=sim.feedback_fraction,
            emergency=sim.emergency,
            groups=self.schedule.groups if sim.use_schedule else (),
            seed=sim.seed,
            horizon_s=sim.horizon_s,
            transmit_s=sim.transmit_s,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return SimConfig(**values)


def _node_lines(node: Optional[yaml.Node], prefix: str = "", lines: Optional[Dict[str, int]] = None
                ) -> Dict[str, int]:
    """Dotted path -> 1-based source line for every node of a composed document."""
    lines = {} if lines is None else lines
    if node is None:
        return lines
    lines.setdefault(prefix, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = f"{prefix}.{key.value}" if prefix else str(key.value)
            lines[path] = key.start_mark.line + 1
            _node_lines(value, path, lines)
    elif isinstance(node, yaml.SequenceNode):
        for index, item in enumerate(node.value):
            _node_lines(item, f"{prefix}[{index}]", lines)
    return lines


class _Reader:
    """Typed access to the parsed document with line-aware errors."""

    def __init__(self, data: Any, lines: Dict[str, int]) -> None:
        self._data = data
        self._lines = lines

    def line(self, path: str) -> Optional[int]:
        while path:
            if path in self._lines:
                return self._lines[path]
            path = path.rsplit(".", 1)[0] if "." in path else ""
        return None

    def error(self, path: str, reason: str, value: Any = None) -> ConfigError:
        return ConfigError(path, reason, self.line(path), value)

    def raw(self, path: str, default: Any = _MISSING) -> Any:
        node = self._data
        for part in path.replace("[", ".[").split("."):
            if part.startswith("["):
                index = int(part[1:-1])
                if not isinstance(node, list) or index >= len(node):
                    node = _MISSING
                    break
                node = node[index]
            else:
                if not isinstance(node, dict) or part not in node:
                    node = _MISSING
                    break
                node = node[part]
        if node is _MISSING:
            if default is _MISSING:
                raise self.error(path, "missing required field")
            return default
        return node

    def number(self, path: str, default: Any = _MISSING) -> float:
        value = self.raw(path, default)
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(path, "expected a number", value)
        return float(value)

    def integer(self, path: str, default: Any = _MISSING) -> int:
        value = self.raw(path, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(path, "expected an integer", value)
        return value

    def flag(self, path: str, default: Any = _MISSING) -> bool:
        value = self.raw(path, default)
        if not isinstance(value, bool):
            raise self.error(path, "expected true or false", value)
        return value

    def text(self, path: str, default: Any = _MISSING) -> str:
        value = self.raw(path, default)
        if not isinstance(value, (str, int)) or isinstance(value, bool):
            raise self.error(path, "expected text", value)
        return str(value)

    def numbers(self, path: str, default: Any = _MISSING) -> Tuple[float, ...]:
        values = self.raw(path, default)
        if values is default:
            return tuple(float(v) for v in values)
        if not isinstance(values, list):
            raise self.error(path, "expected a list of numbers", values)
        return tuple(self.number(f"{path}[{i}]") for i in range(len(values)))

    def items(self, path: str) -> List[str]:
        values = self.raw(path)
        if not isinstance(values, list):
            raise self.error(path, "expected a list", values)
        return [f"{path}[{i}]" for i in range(len(values))]

    def build(self, path: str, factory: Callable[..., T], *args: Any, **kwargs: Any) -> T:
        """Call a domain constructor, reporting its validation errors at `path`."""
        try:
            return factory(*args, **kwargs)
        except ConfigError:
            raise
        except ValidationError as exc:
            raise self.error(path, f"{exc.field}: {exc.reason}", exc.value) from exc


def _profile(reader: _Reader, path: str) -> DeviceProfile:
    def modules(key: str, sleep: bool) -> Tuple[ModuleSpec, ...]:
        if reader.raw(f"{path}.{key}", None) is None:
            return ()
        specs = []
        for item in reader.items(f"{path}.{key}"):
            specs.append(reader.build(
                item, ModuleSpec,
                reader.text(f"{item}.name"),
                reader.number(f"{item}.ch_ma"),
                reader.number(f"{item}.cs_mah"),
                0.0 if sleep else reader.number(f"{item}.rt_s"),
            ))
        return tuple(specs)

    active = modules("modules", sleep=False)
    if not active:
        raise reader.error(f"{path}.modules", "a profile needs at least one module")
    name = path.rsplit(".", 1)[-1]
    return reader.build(path, DeviceProfile, name, active, reader.number(f"{path}.voltage_v"),
                        modules("sleep_modules", sleep=True))


def _fleet(reader: _Reader) -> FleetSettings:
    size = reader.integer("fleet.size")
    if size <= 0:
        raise reader.error("fleet.size", "the fleet needs at least one device", size)
    calendar = reader.build("fleet.calendar", Calendar,
                            reader.number("fleet.calendar.days_per_month", 30.0),
                            reader.number("fleet.calendar.months_per_year", 12.0))
    fractions = reader.numbers("fleet.emergency_fractions", [])
    for i, fraction in enumerate(fractions):
        if not 0.0 <= fraction <= 1.0:
            raise reader.error(f"fleet.emergency_fractions[{i}]", "must be within [0, 1]", fraction)
    return FleetSettings(
        size=size,
        active_s=reader.number("fleet.active_s"),
        sleep_values=reader.numbers("fleet.sleep_values"),
        regular_sleep_s=reader.number("fleet.regular_sleep_s", 3.0),
        emergency_active_s=reader.number("fleet.emergency_active_s", 1.0),
        emergency_fractions=fractions,
        regulatory_limit_s=_limit(reader),
        calendar=calendar,
    )


def _limit(reader: _Reader) -> Optional[float]:
    """Response-time limit for regular cycles; null disables the check."""
    if reader.raw("fleet.regulatory_limit_s", REGULATORY_LIMIT_S) is None:
        return None
    return reader.number("fleet.regulatory_limit_s", REGULATORY_LIMIT_S)


def _link(reader: _Reader) -> LinkSettings:
    link = reader.build("link", LinkSpec, reader.number("link.speed_bps", 115200.0),
                        reader.number("link.packet_bytes", 25.0))
    mist = reader.numbers("link.mist_stage_bytes", [link.packet_bytes])
    feedback = reader.numbers("link.feedback_stage_bytes", [])
    for path, sizes in (("link.mist_stage_bytes", mist), ("link.feedback_stage_bytes", feedback)):
        for i, size in enumerate(sizes):
            if not size > 0:
                raise reader.error(f"{path}[{i}]", "packet sizes must be > 0", size)
    return LinkSettings(link, mist, feedback)


def _queue(reader: _Reader) -> QueueSettings:
    fractions = reader.numbers("queue.feedback_fractions", [0.0])
    for i, fraction in enumerate(fractions):
        if not 0.0 <= fraction < 1.0:
            raise reader.error(f"queue.feedback_fractions[{i}]", "must be within [0, 1)", fraction)
    return QueueSettings(
        feedback_fractions=fractions,
        budget_s=reader.number("queue.budget_s", 3.0),
        step_s=reader.number("queue.step_s", 0.01),
        round_service_rate=reader.flag("queue.round_service_rate", False),
    )


def _group(reader: _Reader, path: str) -> OccupancyGroup:
    schedules = []
    if reader.raw(f"{path}.schedules", None) is not None:
        for item in reader.items(f"{path}.schedules"):
            weekdays = reader.raw(f"{item}.weekdays", None)
            schedules.append(reader.build(item, DaySchedule.parse, reader.text(f"{item}.exit"),
                                          reader.text(f"{item}.entry"), weekdays))
    return reader.build(path, OccupancyGroup, reader.text(f"{path}.name"),
                        reader.integer(f"{path}.apartments"), tuple(schedules),
                        reader.number(f"{path}.away_hours", None))


def _schedule(reader: _Reader) -> ScheduleSettings:
    groups = tuple(_group(reader, item) for item in reader.items("schedule.groups"))
    return ScheduleSettings(
        t_sleep_s=reader.number("schedule.t_sleep_s"),
        t_savings_pct=reader.number("schedule.t_savings_pct"),
        ls_s=reader.number("schedule.ls_s", 4.0),
        ls_values=reader.numbers("schedule.ls_values", []),
        groups=groups,
    )


def _emergency(reader: _Reader) -> Optional[EmergencyScenario]:
    if reader.raw("simulation.emergency", None) is None:
        return None
    affected = reader.raw("simulation.emergency.affected", [0])
    if not (affected == "all" or isinstance(affected, list)):
        raise reader.error("simulation.emergency.affected", "expected 'all' or a list of indices", affected)
    return reader.build("simulation.emergency", EmergencyScenario,
                        reader.number("simulation.emergency.start_s"),
                        reader.number("simulation.emergency.duration_s"),
                        affected if affected == "all" else tuple(affected))


def _simulation(reader: _Reader) -> SimulationSettings:
    def choice(path: str, enum: Callable[[str], T], default: str) -> T:
        value = reader.text(path, default)
        try:
            return enum(value)
        except ValueError:
            raise reader.error(path, "unknown value", value) from None

    stages = reader.text("simulation.stages", "fog")
    if stages not in STAGES:
        raise reader.error("simulation.stages", f"expected one of {', '.join(STAGES)}", stages)
    return SimulationSettings(
        arrival_model=choice("simulation.arrival_model", ArrivalModel, "poisson"),
        service_model=choice("simulation.service_model", ServiceModel, "exponential"),
        stages=stages,
        seed=reader.integer("simulation.seed", 0),
        horizon_s=reader.number("simulation.horizon_s", 10_000.0),
        sleep_s=reader.number("simulation.sleep_s", 0.0),
        long_sleep_s=reader.number("simulation.long_sleep_s", 4.0),
        feedback_fraction=reader.number("simulation.feedback_fraction", 0.0),
        transmit_s=reader.number("simulation.transmit_s", TRANSMIT_S),
        use_schedule=reader.flag("simulation.use_schedule", False),
        emergency=_emergency(reader),
    )


def parse_config(text: str, source: str = "<string>") -> FogDutyConfig:
    """Parse and validate a configuration document."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(source, f"invalid YAML: {exc.problem}",
                          mark.line + 1 if mark else None) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(source, f"invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(source, "expected a mapping at the top level", 1)
    reader = _Reader(data, _node_lines(node))
    config = FogDutyConfig(
        source=source,
        regular=_profile(reader, "profiles.regular"),
        emergency=_profile(reader, "profiles.emergency"),
        fleet=_fleet(reader),
        link=_link(reader),
        queue=_queue(reader),
        schedule=_schedule(reader),
        simulation=_simulation(reader),
    )
    reader.build("simulation", config.sim_config)
    return config


def resolve_config_path(explicit: Union[str, Path, None] = None) -> Optional[Path]:
    """Explicit path, then the FOGDUTY_CONFIG environment variable; None means the bundled reference."""
    if explicit:
        return Path(explicit)
    env_path = os.environ.get(ENV_CONFIG)
    if env_path:
        return Path(env_path)
    return None


def reference_text() -> str:
    return resources.files("fogduty").joinpath("data").joinpath(REFERENCE_CONFIG).read_text(encoding="utf-8")


def load_config(path: Union[str, Path, None] = None) -> FogDutyConfig:
    """Load, validate and cache the configuration at the resolved path."""
    resolved = resolve_config_path(path)
    key = str(resolved.resolve()) if resolved else f"<bundled {REFERENCE_CONFIG}>"
    if key in _config_cache:
        return _config_cache[key]
    if resolved is None:
        _logger.info("using bundled reference config")
        text = reference_text()
    else:
        _logger.info("using config %s", resolved)
        try:
            text = resolved.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(str(resolved), f"cannot read config: {exc.strerror or exc}") from exc
    config = parse_config(text, key)
    _config_cache[key] = config
    return config


def clear_cache() -> None:
    _config_cache.clear()


__all__ = [
    "ENV_CONFIG", "FleetSettings", "FogDutyConfig", "LinkSettings", "QueueSettings",
    "ScheduleSettings", "SimulationSettings", "clear_cache", "load_config", "parse_config",
    "reference_text", "resolve_config_path",
]
