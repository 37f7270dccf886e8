"""Launcher queries: short keyword commands answered with result rows.

    energy <T>               consumption of one device and of the fleet at sleep T
    queue <T>                coordinator arrivals, delay and load at sleep T
    sleep [fog|mist] [f]     largest sleep within the latency budget, feedback share f
    ls <LS>                  condominium savings with Long Sleep LS while residents are out
    frame <hex>              decode a sensor, control or radio frame
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

from pyflowlauncher import Result

from .energy import DutyCycle, EnergyModel
from .errors import FogDutyError, ValidationError
from .protocol.frames import (CONTROL_MESSAGE_LEN, CONTROL_PACKET_LEN, RADIO_FRAME_LEN, SENSOR_FRAME_LEN,
                              ControlKind, ControlMessage, ControlPacket, RadioFrame, RadioFrameType,
                              SensorFrame, hexdump)
from .queueing import arrival_rate, max_sleep, service_rate, tandem_combined
from .reports import build_table, write_table
from .schedule import condominium_savings
from .settings import ENV_CONFIG, STAGES, FogDutyConfig
from .shared import fraction

ICON = "Images/app.png"
COPY_METHOD = "copy_to_clipboard"
EXPORT_DIR = Path(tempfile.gettempdir()) / "fogduty"

USAGE = (
    ("energy <T>", "Consumption of one device and the fleet at sleep time T"),
    ("queue <T>", "Coordinator arrivals, delay and load at sleep time T"),
    ("sleep [fog|mist] [f]", "Largest sleep time within the latency budget"),
    ("ls <LS>", "Condominium savings with Long Sleep while residents are out"),
    ("frame <hex>", "Decode a sensor, control or radio frame"),
)


@dataclass(frozen=True)
class LauncherSettings:
    config_path: Optional[str] = None
    ls_s: Optional[float] = None
    feedback: float = 0.0

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any],
                     environ: Optional[Mapping[str, str]] = None) -> "LauncherSettings":
        """Settings form values; FOGDUTY_CONFIG wins over the form's config path."""
        environ = os.environ if environ is None else environ
        config_path = environ.get(ENV_CONFIG) or values.get("config_path") or None
        return cls(config_path, _optional_number("ls", values.get("ls")),
                   _optional_number("feedback", values.get("feedback")) or 0.0)


def _optional_number(name: str, value: Any) -> Optional[float]:
    if value is None or str(value).strip() == "":
        return None
    return _number(name, str(value))


def _number(name: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(name, text, "expected a number") from None


def _share(text: str) -> float:
    """Feedback share as a fraction; "5%" and "0.05" are the same."""
    if text.endswith("%"):
        return fraction(_number("feedback", text[:-1]))
    return _number("feedback", text)


def row(title: str, subtitle: str = "", copy: Optional[str] = None, table: Optional[str] = None,
        score: int = 0) -> Result:
    """Result row whose action copies `copy` (or the title) to the clipboard."""
    text = copy if copy is not None else title
    return Result(
        Title=title,
        SubTitle=subtitle,
        IcoPath=ICON,
        Score=score,
        JsonRPCAction={"method": COPY_METHOD, "parameters": [text]},
        ContextData=[text, table or ""],
    )


def usage_rows() -> List[Result]:
    return [Result(Title=command, SubTitle=help_text, IcoPath=ICON) for command, help_text in USAGE]


def error_rows(exc: Exception) -> List[Result]:
    return [Result(Title=f"Error: {exc.__class__.__name__}", SubTitle=str(exc), IcoPath=ICON)]


def _energy(config: FogDutyConfig, args: Sequence[str], settings: LauncherSettings) -> List[Result]:
    fleet = config.fleet
    sleep_s = _number("T", args[0]) if args else fleet.regular_sleep_s
    duty = DutyCycle(fleet.active_s, sleep_s).check_regulatory(fleet.regulatory_limit_s)
    model = EnergyModel(config.regular, duty, fleet.calendar)
    baseline = EnergyModel(config.regular, DutyCycle(fleet.active_s, 0.0), fleet.calendar)
    savings = 100.0 * (1.0 - model.rate_mwh_per_s / baseline.rate_mwh_per_s)
    device_year = model.consumption_over("year")
    fleet_year = model.consumption_over("year", fleet.size)
    return [
        row(f"{model.energy_per_cycle_mwh:.6f} mWh per cycle", f"T={sleep_s:g} s, cycle {duty.cycle_s:g} s",
            f"{model.energy_per_cycle_mwh:.6f}", "device-consumption"),
        row(f"{device_year:.2f} kWh per year", "One device", f"{device_year:.2f}", "device-consumption"),
        row(f"{fleet_year:.2f} kWh per year", f"{fleet.size} devices", f"{fleet_year:.2f}",
            "fleet-consumption"),
        row(f"{savings:.2f} % saved", "Against no sleep", f"{savings:.2f}", "device-consumption"),
    ]


def _queue(config: FogDutyConfig, args: Sequence[str], settings: LauncherSettings) -> List[Result]:
    fleet = config.fleet
    sleep_s = _number("T", args[0]) if args else 0.0
    lam = arrival_rate(fleet.size, fleet.active_s + sleep_s)
    metrics = tandem_combined(lam, (config.link.link.packet_bytes,), config.link.link).metrics(
        sleep_s, fleet.active_s)
    mu = service_rate(config.link.link)
    return [
        row(f"{metrics.system_time_ms:.0f} ms E{{T}}", f"lambda {lam:.1f} pct/s, mu {mu:.0f} pct/s",
            f"{metrics.system_time_ms:.0f}", "coordinator-queue"),
        row(f"rho {metrics.load:.3f}", f"T={sleep_s:g} s, {fleet.size} devices", f"{metrics.load:.3f}",
            "coordinator-queue"),
    ]


def _sleep(config: FogDutyConfig, args: Sequence[str], settings: LauncherSettings) -> List[Result]:
    args = list(args)
    stages = args.pop(0) if args and args[0] in STAGES else "fog"
    share = _share(args[0]) if args else settings.feedback
    fleet, queue = config.fleet, config.queue
    model = tandem_combined(0.0, config.stage_bytes(stages), config.link.link)
    if queue.round_service_rate:
        model = model.whole_packets()
    plan = max_sleep(fleet.size, fleet.active_s, model.service_rate_pps, share, queue.budget_s, queue.step_s)
    m = plan.metrics
    table = "mist-sleep" if stages == "mist" else "feedback-sleep"
    return [
        row(f"T = {plan.sleep_s:.2f} s", f"{stages}, feedback {share:g}, mu {model.service_rate_pps:g} pct/s",
            f"{plan.sleep_s:.2f}", table),
        row(f"TT = {m.total_time_s:.3f} s", f"E{{T}} {m.system_time_s:.4f} s within {queue.budget_s:g} s",
            f"{m.total_time_s:.3f}", table),
        row(f"{m.savings_pct:.1f} % saved", f"lambda {m.arrival_rate_pps:.1f} pct/s, rho {m.load:.4f}",
            f"{m.savings_pct:.1f}", table),
    ]


def _long_sleep(config: FogDutyConfig, args: Sequence[str], settings: LauncherSettings) -> List[Result]:
    sched = config.schedule
    ls_s = _number("LS", args[0]) if args else (settings.ls_s if settings.ls_s is not None else sched.ls_s)
    breakdown = condominium_savings(sched.groups, sched.t_savings_pct, ls_s, config.fleet.active_s)
    rows = [
        row(f"condo E {breakdown.savings_pct:.2f} %", f"LS={ls_s:g} s, T savings {sched.t_savings_pct:g} %",
            f"{breakdown.savings_pct:.2f}", "condominium-savings"),
        row(f"condo ES {breakdown.extra_savings_pct:.2f} %", "Extra over T-only operation",
            f"{breakdown.extra_savings_pct:.2f}", "condominium-savings"),
    ]
    rows += [row(f"group {g.name}: E {g.savings_pct:.2f} %",
                 f"{g.apartments} apartments, ES {g.extra_savings_pct:.2f} %",
                 f"{g.savings_pct:.2f}", "condominium-savings") for g in breakdown.groups]
    return rows


def decode_frame(data: bytes) -> List[str]:
    """Field descriptions of a frame, chosen by its length."""
    if len(data) == RADIO_FRAME_LEN:
        radio = RadioFrame.decode(data)
        lines = [f"radio {radio.frame_type.name.lower()} long 0x{radio.long_addr:016x} "
                 f"short 0x{radio.short_addr:04x}"]
        inner = (radio.sensor_frame() if radio.frame_type is RadioFrameType.RECEIVE
                 else radio.control_packet())
        return lines + _inner_lines(inner)
    if len(data) == SENSOR_FRAME_LEN:
        return _inner_lines(SensorFrame.decode(data))
    if len(data) == CONTROL_PACKET_LEN:
        return _inner_lines(ControlPacket.decode(data))
    if len(data) == CONTROL_MESSAGE_LEN:
        return [_control_line(ControlMessage.decode(data))]
    raise ValidationError("frame", len(data), f"expected {CONTROL_MESSAGE_LEN}, {CONTROL_PACKET_LEN}, "
                                               f"{SENSOR_FRAME_LEN} or {RADIO_FRAME_LEN} bytes")


def _control_line(msg: ControlMessage) -> str:
    value = chr(msg.value) if msg.kind in (ControlKind.ALARM, ControlKind.MODE) else str(msg.value)
    return f"control {msg.kind.name.lower()} {value}"


def _inner_lines(frame: Any) -> List[str]:
    if isinstance(frame, SensorFrame):
        p = frame.payload
        return [f"sensor from 0x{frame.source_addr:04x}",
                f"temperature {p.temperature}, humidity {p.humidity}, gas {p.gas_level}, "
                f"flame {p.flame}, state {p.state}, battery {p.battery}"]
    return [f"control to 0x{frame.dest_addr:04x}", _control_line(frame.control)]


def _frame(config: FogDutyConfig, args: Sequence[str], settings: LauncherSettings) -> List[Result]:
    text = "".join(args)
    try:
        data = bytes.fromhex(text)
    except ValueError:
        raise ValidationError("frame", text, "expected hex bytes") from None
    dump = hexdump(data)
    return [row(line, dump.splitlines()[0] if dump else "", line) for line in decode_frame(data)]


COMMANDS: Dict[str, Callable[[FogDutyConfig, Sequence[str], LauncherSettings], List[Result]]] = {
    "energy": _energy,
    "queue": _queue,
    "sleep": _sleep,
    "ls": _long_sleep,
    "frame": _frame,
}


def handle_query(query: str, config: FogDutyConfig,
                 settings: Optional[LauncherSettings] = None) -> List[Result]:
    """Result rows for one launcher query; library errors propagate to the plugin's handlers."""
    settings = settings or LauncherSettings()
    words = query.split()
    if not words:
        return usage_rows()
    command, args = words[0].lower(), words[1:]
    handler = COMMANDS.get(command)
    if handler is None:
        return [Result(Title=f"Unknown command: {command}", SubTitle="Try " + ", ".join(COMMANDS),
                       IcoPath=ICON)] + usage_rows()
    return handler(config, args, settings)


def export_table(name: str, config: FogDutyConfig, out_dir: Path = EXPORT_DIR) -> Path:
    return write_table(build_table(name, config), out_dir)


def error_types() -> List[type]:
    """FogDutyError and all of its subclasses; the plugin registers handlers per exact class."""
    found, pending = [], [FogDutyError]
    while pending:
        cls = pending.pop()
        found.append(cls)
        pending.extend(cls.__subclasses__())
    return found


__all__ = [
    "COMMANDS", "LauncherSettings", "USAGE", "decode_frame", "error_rows", "error_types",
    "export_table", "handle_query", "row", "usage_rows",
]
