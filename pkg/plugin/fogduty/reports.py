"""Published tables as named reproduction targets, their writers and golden diffs.

Every target is a function of the loaded configuration. Cells are formatted at the
precision the figures were published with; golden files under ``data/golden``
hold the published figures and are compared cell by cell.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .energy import DutyCycle, Mode, Period, consumption_over, mixed_consumption, sweep
from .errors import UnknownTable, ValidationError
from .queueing import coordinator_sweep, max_sleep, service_rate, tandem_combined
from .schedule import condominium_savings, consumption_deltas
from .settings import FogDutyConfig
from .sim.report import SimReport

_logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
DEFAULT_REL_TOLERANCE = 0.005
DEVIATIONS_FILE = "deviations.csv"
# The published LS=58 consumption cells follow from 72.70 % savings, not the printed 72.80 %.
TABLE_TOLERANCE = {"long-sleep-sweep": 0.01}
# Published cells printed truncated instead of rounded, with their absolute tolerance.
CELL_TOLERANCE = {("fleet-consumption", 2, "hour"): 0.01}
# Absolute tolerance per column, replacing the relative one; 0 means equal at printed precision.
COLUMN_TOLERANCE = {
    ("emergency-mix", "savings_pct"): 0.1,
    ("coordinator-queue", "lambda_pps"): 0.0,
    ("coordinator-queue", "system_time_ms"): 0.0,
    ("coordinator-queue", "rho"): 0.0,
}
_PERIODS = tuple(Period)


@dataclass(frozen=True)
class Column:
    name: str
    fmt: str = ""


@dataclass(frozen=True)
class Table:
    name: str
    title: str
    columns: Tuple[Column, ...]
    rows: Tuple[Tuple[Any, ...], ...]

    def formatted(self, full_precision: bool = False) -> List[List[str]]:
        return [[format_cell(value, column.fmt, full_precision)
                 for value, column in zip(row, self.columns)] for row in self.rows]

    @property
    def header(self) -> List[str]:
        return [column.name for column in self.columns]


def format_cell(value: Any, fmt: str, full_precision: bool = False) -> str:
    if value is None:
        return "-"
    if isinstance(value, str):
        return value
    if isinstance(value, bool) or isinstance(value, int) and not fmt:
        return str(value)
    if full_precision:
        return format(float(value), ".17g")
    return format(value, fmt) if fmt else repr(value)


def clock_hours(hours: float) -> str:
    """Hours as H:MM."""
    minutes = int(round(hours * 60))
    return f"{minutes // 60}:{minutes % 60:02d}"


TableBuilder = Callable[[FogDutyConfig], Table]
TABLES: Dict[str, TableBuilder] = {}


def table(name: str) -> Callable[[TableBuilder], TableBuilder]:
    def register(builder: TableBuilder) -> TableBuilder:
        TABLES[name] = builder
        return builder
    return register


def table_names() -> List[str]:
    return list(TABLES)


def build_table(name: str, config: FogDutyConfig) -> Table:
    try:
        builder = TABLES[name]
    except KeyError:
        raise UnknownTable(name, table_names()) from None
    return builder(config)


_MODULE_COLUMNS = (Column("i", "d"), Column("module"), Column("ch_ma", "g"), Column("cs_mah", ".2e"),
                   Column("rt_s", "g"))
_KWH_COLUMNS = (Column("minute", ".2e"), Column("hour", ".2e"), Column("day", ".2e"),
                Column("month", ".3f"), Column("year", ".2f"))
_FLEET_KWH_COLUMNS = (Column("minute", ".2e"), Column("hour", ".2f"), Column("day", ".2f"),
                      Column("month", ".2f"), Column("year", ".2f"))


def _module_rows(profile) -> Tuple[Tuple[Any, ...], ...]:
    rows = [(i, m.name, m.current_active_ma, m.current_per_second_mah, m.response_time_s)
            for i, m in enumerate(profile.modules, start=1)]
    start = len(rows) + 1
    rows += [(i, m.name, m.current_active_ma, m.current_per_second_mah, "T")
             for i, m in enumerate(profile.sleep_modules, start=start)]
    return tuple(rows)


@table("modules-regular")
def modules_regular(config: FogDutyConfig) -> Table:
    return Table("modules-regular", "Module currents and on-times in regular operation",
                 _MODULE_COLUMNS, _module_rows(config.regular))


@table("modules-emergency")
def modules_emergency(config: FogDutyConfig) -> Table:
    return Table("modules-emergency", "Module currents and on-times in emergency operation",
                 _MODULE_COLUMNS, _module_rows(config.emergency))


@table("device-consumption")
def device_consumption(config: FogDutyConfig) -> Table:
    fleet = config.fleet
    reports = sweep(config.regular, fleet.sleep_values, fleet.active_s, 1, fleet.calendar,
                    fleet.regulatory_limit_s)
    # the baseline row prints a dash
    rows = tuple(
        (t, r.charge_per_cycle_mah, r.energy_per_cycle_mwh, *(r.kwh_per[p] for p in _PERIODS),
         r.savings_pct if float(t) else None)
        for t, r in reports.items())
    columns = (Column("T", "g"), Column("current_mah", ".7f"), Column("cycle_mwh", ".6f"),
               *_KWH_COLUMNS, Column("savings_pct", ".2f"))
    return Table("device-consumption", "One device in regular mode, kWh per period", columns, rows)


@table("fleet-consumption")
def fleet_consumption(config: FogDutyConfig) -> Table:
    fleet = config.fleet
    reports = sweep(config.regular, fleet.sleep_values, fleet.active_s, fleet.size, fleet.calendar,
                    fleet.regulatory_limit_s)
    rows = tuple((t, r.energy_per_cycle_mwh * fleet.size, *(r.kwh_per[p] for p in _PERIODS))
                 for t, r in reports.items())
    columns = (Column("T", "g"), Column("cycle_mwh", ".4f"), *_FLEET_KWH_COLUMNS)
    return Table("fleet-consumption", f"{fleet.size} devices, kWh per period", columns, rows)


@table("emergency-mix")
def emergency_mix(config: FogDutyConfig) -> Table:
    fleet = config.fleet
    regular = DutyCycle(fleet.active_s, fleet.regular_sleep_s)
    emergency = DutyCycle(fleet.emergency_active_s, 0.0, Mode.EMERGENCY)
    rows = []
    for fraction in fleet.emergency_fractions:
        mix = mixed_consumption(regular, fraction, regular_profile=config.regular,
                                emergency_profile=config.emergency, fleet_size=fleet.size,
                                emergency_duty=emergency, calendar=fleet.calendar)
        rows.append((f"{fraction * 100:g}%", mix.energy_per_cycle_mwh,
                     *(mix.kwh_per[p] for p in _PERIODS), mix.savings_pct))
    columns = (Column("emergency"), Column("cycle_mwh", ".2f"), *_FLEET_KWH_COLUMNS,
               Column("savings_pct", ".2f"))
    return Table("emergency-mix", f"{fleet.size} devices with a share of time in emergency mode",
                 columns, tuple(rows))


def _rate(config: FogDutyConfig, stage_bytes: Sequence[float]) -> float:
    mu = tandem_combined(0.0, stage_bytes, config.link.link).service_rate_pps
    return float(round(mu)) if config.queue.round_service_rate else mu


@table("coordinator-queue")
def coordinator_queue(config: FogDutyConfig) -> Table:
    fleet = config.fleet
    mu = service_rate(config.link.link)
    rows = tuple(
        (m.sleep_s, m.arrival_rate_pps, m.system_time_ms, m.load, m.savings_pct or None)
        for m in coordinator_sweep(fleet.size, fleet.active_s, fleet.sleep_values, mu))
    columns = (Column("T", "g"), Column("lambda_pps", ".0f"), Column("system_time_ms", ".0f"),
               Column("rho", ".3f"), Column("savings_pct", ".2f"))
    return Table("coordinator-queue", "Coordinator arrivals, delay and load per sleep time",
                 columns, rows)


def _sleep_table(config: FogDutyConfig, name: str, title: str, stage_bytes: Sequence[float]) -> Table:
    fleet, queue = config.fleet, config.queue
    mu = _rate(config, stage_bytes)
    rows = []
    for fraction in queue.feedback_fractions:
        plan = max_sleep(fleet.size, fleet.active_s, mu, fraction, queue.budget_s, queue.step_s)
        m = plan.metrics
        rows.append(("none" if fraction == 0 else f"{fraction:g}", plan.sleep_s, m.arrival_rate_pps,
                     m.feedback_rate_pps if fraction else None, m.system_time_s, m.load,
                     m.total_time_s, m.savings_pct))
    columns = (Column("feedback"), Column("T", ".2f"), Column("lambda_pps", ".1f"),
               Column("feedback_pps", ".0f"), Column("system_time_s", ".4f"), Column("rho", ".4f"),
               Column("total_time_s", ".3f"), Column("savings_pct", ".1f"))
    return Table(name, title, columns, tuple(rows))


@table("feedback-sleep")
def feedback_sleep(config: FogDutyConfig) -> Table:
    return _sleep_table(config, "feedback-sleep", "Largest sleep time per feedback share, Fog only",
                        (config.link.link.packet_bytes,))


@table("mist-sleep")
def mist_sleep(config: FogDutyConfig) -> Table:
    return _sleep_table(config, "mist-sleep", "Largest sleep time per feedback share, Mist and Fog in tandem",
                        config.link.mist_stage_bytes)


@table("occupancy-groups")
def occupancy_groups(config: FogDutyConfig) -> Table:
    rows = tuple(
        (g.name, " ".join(str(s) for s in g.schedules), clock_hours(g.away_hours),
         clock_hours(g.home_hours), g.away_pct, g.home_pct)
        for g in config.schedule.groups)
    columns = (Column("group"), Column("schedules"), Column("away_h"), Column("home_h"),
               Column("away_pct", ".2f"), Column("home_pct", ".2f"))
    return Table("occupancy-groups", "Away and home time per occupancy group", columns, rows)


@table("condominium-savings")
def condominium_table(config: FogDutyConfig) -> Table:
    sched = config.schedule
    breakdown = condominium_savings(sched.groups, sched.t_savings_pct, sched.ls_s, config.fleet.active_s)
    rows = [(g.name, g.apartments, g.total_away_hours, g.total_home_hours, g.weight_pct, g.savings_pct,
             g.extra_savings_pct) for g in breakdown.groups]
    rows.append(("condo", breakdown.apartments, breakdown.total_away_hours, breakdown.total_home_hours,
                 100.0, breakdown.savings_pct, breakdown.extra_savings_pct))
    columns = (Column("group"), Column("apartments", "d"), Column("total_away_h", ".0f"),
               Column("total_home_h", ".0f"), Column("away_weight_pct", ".2f"),
               Column("savings_pct", ".2f"), Column("extra_savings_pct", ".2f"))
    return Table("condominium-savings", f"Savings per group with LS={sched.ls_s:g} s", columns,
                 tuple(rows))


@table("long-sleep-sweep")
def long_sleep_sweep(config: FogDutyConfig) -> Table:
    fleet, sched = config.fleet, config.schedule
    periods = (Period.DAY, Period.MONTH, Period.YEAR)
    baseline = {p: consumption_over(config.regular, DutyCycle(fleet.active_s, 0.0), p, fleet.size,
                                    fleet.calendar) for p in periods}
    t_only = consumption_deltas(baseline, sched.t_savings_pct, sched.t_savings_pct)
    rows: List[Tuple[Any, ...]] = [
        ("T=0", 0.0, None, *(v for p in periods for v in (baseline[p], None))),
        (f"T={sched.t_sleep_s:g}", sched.t_savings_pct, None,
         *(v for p in periods for v in (t_only[p].consumption_kwh, t_only[p].vs_baseline_kwh))),
    ]
    for ls in sched.ls_values:
        breakdown = condominium_savings(sched.groups, sched.t_savings_pct, ls, fleet.active_s, baseline)
        rows.append((f"LS={ls:g}", breakdown.savings_pct, breakdown.extra_savings_pct,
                     *(v for p in periods for v in (breakdown.deltas[p].consumption_kwh,
                                                    breakdown.deltas[p].vs_t_only_kwh))))
    columns = (Column("setting"), Column("savings_pct", ".2f"), Column("extra_savings_pct", ".2f"),
               Column("day", ".2f"), Column("day_diff", ".2f"), Column("month", ".2f"),
               Column("month_diff", ".2f"), Column("year", ".2f"), Column("year_diff", ".2f"))
    return Table("long-sleep-sweep", "Fleet consumption and savings per Long Sleep value", columns,
                 tuple(rows))


# writers

def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValidationError("format", fmt, f"expected one of {', '.join(FORMATS)}")
    return fmt


def _json_cell(text: str) -> Any:
    if text == "-":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def table_text(tbl: Table, fmt: str = "csv", full_precision: bool = False) -> str:
    rows = tbl.formatted(full_precision)
    if _check_format(fmt) == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(tbl.header)
        writer.writerows(rows)
        return buffer.getvalue()
    document = {
        "name": tbl.name,
        "title": tbl.title,
        "columns": tbl.header,
        "rows": [dict(zip(tbl.header, (_json_cell(cell) for cell in row))) for row in rows],
    }
    return json.dumps(document, indent=2) + "\n"


def write_table(tbl: Table, out_dir: Path, fmt: str = "csv", full_precision: bool = False) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{tbl.name}.{fmt}"
    path.write_text(table_text(tbl, fmt, full_precision), encoding="utf-8")
    return path


def write_sim_report(report: SimReport, out_dir: Path, fmt: str = "json", name: str = "simulation") -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.{_check_format(fmt)}"
    if fmt == "json":
        path.write_text(report.to_json() + "\n", encoding="utf-8")
    else:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("metric", "value"))
        writer.writerows((metric, format_cell(value, "")) for metric, value in report.to_rows())
        path.write_text(buffer.getvalue(), encoding="utf-8")
    return path


# golden comparison

@dataclass(frozen=True)
class CellDeviation:
    table: str
    row: int
    column: str
    expected: str
    actual: str
    deviation: Optional[float]
    tolerance: Optional[float]
    passed: bool


@dataclass
class Reproduction:
    files: List[Path] = field(default_factory=list)
    cells: List[CellDeviation] = field(default_factory=list)

    @property
    def failures(self) -> List[CellDeviation]:
        return [cell for cell in self.cells if not cell.passed]

    @property
    def passed(self) -> bool:
        return not self.failures


def half_unit(text: str) -> float:
    """Half a unit in the last printed digit of a numeric cell."""
    mantissa, _, exponent = text.strip().lower().partition("e")
    decimals = len(mantissa.split(".", 1)[1]) if "." in mantissa else 0
    return 0.5 * 10.0 ** (int(exponent or 0) - decimals)


def load_golden(name: str) -> List[List[str]]:
    """Published rows of a target, without the header."""
    resource = resources.files("fogduty").joinpath("data").joinpath("golden").joinpath(f"{name}.csv")
    if not resource.is_file():
        raise UnknownTable(name, table_names())
    rows = list(csv.reader(io.StringIO(resource.read_text(encoding="utf-8"))))
    return rows[1:]


def _as_float(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def compare_golden(tbl: Table, golden: Sequence[Sequence[str]],
                   rel_tol: float = DEFAULT_REL_TOLERANCE,
                   cell_tolerance: Optional[Dict[Tuple[str, int, str], float]] = None,
                   ) -> List[CellDeviation]:
    if cell_tolerance is None:
        cell_tolerance = CELL_TOLERANCE
    printed = tbl.formatted()
    cells: List[CellDeviation] = []
    for r in range(max(len(golden), len(tbl.rows))):
        for c, column in enumerate(tbl.columns):
            expected = golden[r][c] if r < len(golden) and c < len(golden[r]) else "<missing>"
            actual = printed[r][c] if r < len(printed) else "<missing>"
            value = tbl.rows[r][c] if r < len(tbl.rows) else None
            number = _as_float(expected)
            if number is None or isinstance(value, str) or value is None:
                cells.append(CellDeviation(tbl.name, r + 1, column.name, expected, actual, None, None,
                                           expected.strip() == actual))
                continue
            deviation = abs(float(value) - number)
            allowed = COLUMN_TOLERANCE.get((tbl.name, column.name), rel_tol * abs(number))
            tolerance = max(allowed, half_unit(expected),
                            cell_tolerance.get((tbl.name, r + 1, column.name), 0.0))
            cells.append(CellDeviation(tbl.name, r + 1, column.name, expected, actual, deviation,
                                       tolerance, deviation <= tolerance))
    return cells


def write_deviations(cells: Iterable[CellDeviation], path: Path) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("table", "row", "column", "expected", "actual", "deviation", "tolerance", "status"))
    for cell in cells:
        writer.writerow((cell.table, cell.row, cell.column, cell.expected, cell.actual,
                         "" if cell.deviation is None else format(cell.deviation, ".3g"),
                         "" if cell.tolerance is None else format(cell.tolerance, ".3g"),
                         "ok" if cell.passed else "FAIL"))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buffer.getvalue(), encoding="utf-8")
    return path


def reproduce(config: FogDutyConfig, out_dir: Path, names: Optional[Sequence[str]] = None,
              fmt: str = "csv", full_precision: bool = False,
              rel_tol: float = DEFAULT_REL_TOLERANCE) -> Reproduction:
    """Write the selected targets and diff each against its golden file."""
    _check_format(fmt)
    selected = list(names) if names else table_names()
    for name in selected:
        if name not in TABLES:
            raise UnknownTable(name, table_names())
    result = Reproduction()
    for name in selected:
        tbl = build_table(name, config)
        result.files.append(write_table(tbl, out_dir, fmt, full_precision))
        tolerance = max(rel_tol, TABLE_TOLERANCE.get(name, 0.0))
        result.cells.extend(compare_golden(tbl, load_golden(name), tolerance))
    for cell in result.failures:
        _logger.warning("%s row %d %s: expected %s, got %s", cell.table, cell.row, cell.column,
                        cell.expected, cell.actual)
    result.files.append(write_deviations(result.cells, out_dir / DEVIATIONS_FILE))
    return result


__all__ = [
    "CellDeviation", "Column", "FORMATS", "Reproduction", "TABLES", "Table", "build_table",
    "clock_hours", "compare_golden", "format_cell", "half_unit", "load_golden", "reproduce",
    "table_names", "table_text", "write_deviations", "write_sim_report", "write_table",
]
