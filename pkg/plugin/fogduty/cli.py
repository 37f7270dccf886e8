"""Command-line entry point: analyses, simulations and table reproduction."""
from __future__ import annotations

import json
import logging
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence, Tuple

import click

from .energy import DutyCycle, EnergyModel
from .errors import FogDutyError, ValidationError
from .queueing import max_sleep, service_rate, tandem_combined
from .reports import (DEFAULT_REL_TOLERANCE, FORMATS, build_table, reproduce, table_names,
                      write_sim_report, write_table)
from .schedule import condominium_savings
from .settings import ENV_CONFIG, STAGES, FogDutyConfig, load_config
from .sim import ArrivalModel, ServiceModel, compare_with_analytic, merge_reports, run

_logger = logging.getLogger(__name__)

EXIT_DEVIATION = 1
EXIT_INVALID = 2
MANIFEST_FILE = "manifest.json"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class RunManifest:
    """What one command read and wrote; stored next to its outputs."""
    subcommand: str
    config: str
    out_dir: str
    tables: Tuple[str, ...] = ()
    fmt: str = "csv"
    files: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.fmt not in FORMATS:
            raise ValidationError("format", self.fmt, f"expected one of {', '.join(FORMATS)}")

    def to_json(self) -> str:
        data = asdict(self)
        data["tables"] = list(self.tables)
        data["files"] = list(self.files)
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def write(self) -> Path:
        path = Path(self.out_dir) / MANIFEST_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


@dataclass
class CliState:
    config_path: Optional[Path] = None

    def config(self) -> FogDutyConfig:
        return load_config(self.config_path)


class FogDutyGroup(click.Group):
    """Group that turns library errors into a one-line diagnostic and exit code 2."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except FogDutyError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INVALID)


def _output_options(command: Callable[..., Any]) -> Callable[..., Any]:
    command = click.option("--full-precision", is_flag=True,
                           help="Write numbers with all significant digits.")(command)
    command = click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv",
                           show_default=True, help="Output file format.")(command)
    command = click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
                           default=Path("out"), show_default=True,
                           help="Directory the files are written to.")(command)
    return command


def _write_tables(config: FogDutyConfig, names: Sequence[str], out_dir: Path, fmt: str,
                  full_precision: bool) -> List[Path]:
    return [write_table(build_table(name, config), out_dir, fmt, full_precision) for name in names]


def _manifest(subcommand: str, config: FogDutyConfig, out_dir: Path, files: Sequence[Path],
              fmt: str, tables: Sequence[str] = ()) -> None:
    RunManifest(subcommand, config.source, str(out_dir), tuple(tables), fmt,
                tuple(sorted(path.name for path in files))).write()


@click.group(cls=FogDutyGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
              envvar=ENV_CONFIG,
              help=f"Configuration file; defaults to ${ENV_CONFIG}, then the bundled reference.")
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages to stderr.")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], verbose: bool) -> None:
    """Energy, queue and occupancy analyses for a fleet of duty-cycled alarm devices."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format=LOG_FORMAT,
                        stream=sys.stderr)
    ctx.obj = CliState(config_path)


@cli.command("analyze-energy")
@_output_options
@click.pass_obj
def analyze_energy(state: CliState, out_dir: Path, fmt: str, full_precision: bool) -> None:
    """Device, fleet and emergency-mix consumption tables."""
    config = state.config()
    names = ("modules-regular", "modules-emergency", "device-consumption", "fleet-consumption",
             "emergency-mix")
    files = _write_tables(config, names, out_dir, fmt, full_precision)
    fleet = config.fleet
    model = EnergyModel(config.regular, DutyCycle(fleet.active_s, fleet.regular_sleep_s), fleet.calendar)
    click.echo(f"cycle {model.energy_per_cycle_mwh:.6f} mWh, "
               f"{model.consumption_over('year', fleet.size):.2f} kWh/year for {fleet.size} devices "
               f"at T={fleet.regular_sleep_s:g}")
    _manifest("analyze-energy", config, out_dir, files, fmt, names)


@cli.command("analyze-queue")
@click.option("--feedback", type=click.FloatRange(0.0, 1.0, max_open=True), default=None,
              help="Also report the largest sleep time with this feedback share.")
@_output_options
@click.pass_obj
def analyze_queue(state: CliState, feedback: Optional[float], out_dir: Path, fmt: str,
                  full_precision: bool) -> None:
    """Coordinator delay per sleep time and the largest sleep within the latency budget."""
    config = state.config()
    names = ("coordinator-queue", "feedback-sleep", "mist-sleep")
    files = _write_tables(config, names, out_dir, fmt, full_precision)
    if feedback is not None:
        fleet, queue = config.fleet, config.queue
        for stages in STAGES:
            model = tandem_combined(0.0, config.stage_bytes(stages), config.link.link, feedback,
                                    config.link.feedback_stage_bytes)
            if queue.round_service_rate:
                model = model.whole_packets()
            plan = max_sleep(fleet.size, fleet.active_s, model.service_rate_pps, feedback,
                             queue.budget_s, queue.step_s)
            click.echo(f"{stages}: T={plan.sleep_s:.2f} s, E{{T}}={plan.metrics.system_time_s:.4f} s, "
                       f"TT={plan.metrics.total_time_s:.3f} s, S={plan.metrics.savings_pct:.1f} %")
            if model.feedback_packet_bytes is not None:
                path_rate = service_rate(config.link.link.with_packet(model.feedback_packet_bytes))
                click.echo(f"  feedback path {model.feedback_packet_bytes:g} B, "
                           f"mu={path_rate:.1f} pkt/s, control {model.feedback_rate_pps:.1f} pkt/s")
    _manifest("analyze-queue", config, out_dir, files, fmt, names)


@cli.command("analyze-schedule")
@click.option("--ls", "ls_s", type=click.FloatRange(min=0.0), default=None,
              help="Long Sleep seconds; defaults to the configured value.")
@_output_options
@click.pass_obj
def analyze_schedule(state: CliState, ls_s: Optional[float], out_dir: Path, fmt: str,
                     full_precision: bool) -> None:
    """Occupancy groups and the condominium savings of Long Sleep."""
    config = state.config()
    if ls_s is not None:
        config = replace(config, schedule=replace(config.schedule, ls_s=ls_s))
    sched = config.schedule
    names = ("occupancy-groups", "condominium-savings", "long-sleep-sweep")
    files = _write_tables(config, names, out_dir, fmt, full_precision)
    breakdown = condominium_savings(sched.groups, sched.t_savings_pct, sched.ls_s, config.fleet.active_s)
    click.echo(f"LS={sched.ls_s:g} s")
    click.echo(f"condo E {breakdown.savings_pct:.2f} %")
    click.echo(f"condo ES {breakdown.extra_savings_pct:.2f} %")
    _manifest("analyze-schedule", config, out_dir, files, fmt, names)


@cli.command()
@click.option("--seed", type=int, default=None, help="Seed of the first replication.")
@click.option("--horizon", "horizon_s", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="Simulated seconds per replication.")
@click.option("--feedback", type=click.FloatRange(0.0, 1.0, max_open=True), default=None,
              help="Share of the service rate used by control traffic.")
@click.option("--arrival", type=click.Choice([m.value for m in ArrivalModel]), default=None)
@click.option("--service", type=click.Choice([m.value for m in ServiceModel]), default=None)
@click.option("--stages", type=click.Choice(STAGES), default=None,
              help="Coordinator chain: Fog only, or Mist and Fog in tandem.")
@click.option("--replications", type=click.IntRange(min=1), default=1, show_default=True,
              help="Runs with consecutive seeds, pooled into one report.")
@click.option("--compare", is_flag=True, help="Check the pooled run against the closed-form models.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=Path("out"),
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True)
@click.pass_obj
def simulate(state: CliState, seed: Optional[int], horizon_s: Optional[float], feedback: Optional[float],
             arrival: Optional[str], service: Optional[str], stages: Optional[str], replications: int,
             compare: bool, out_dir: Path, fmt: str) -> None:
    """Run the discrete-event simulation of the fleet and its coordinator."""
    config = state.config()
    sim_config = config.sim_config(
        seed=seed, horizon_s=horizon_s, feedback_fraction=feedback,
        arrival_model=arrival and ArrivalModel(arrival),
        service_model=service and ServiceModel(service),
        stage_packet_bytes=stages and config.stage_bytes(stages))
    reports = [run(sim_config.with_seed(sim_config.seed + i)) for i in range(replications)]
    report = merge_reports(reports) if len(reports) > 1 else reports[0]
    files = [write_sim_report(report, out_dir, fmt)]
    click.echo(f"served {report.served.get('device', 0)} reports, "
               f"L={report.mean_in_system:.4f}, W={report.mean_sojourn_s * 1000:.2f} ms, "
               f"energy {report.energy_mwh:.3f} mWh")
    if report.saturated:
        click.echo("warning: coordinator saturated", err=True)
    passed = True
    if compare:
        energy_model = EnergyModel(sim_config.regular_profile,
                                   DutyCycle(sim_config.active_s, sim_config.sleep_s), config.fleet.calendar)
        summary = compare_with_analytic(report, sim_config.queue_model(), energy_model)
        path = out_dir / "comparison.json"
        path.write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        files.append(path)
        for deviation in summary.deviations:
            status = "ok" if deviation.passed else ("FAIL" if deviation.enforced else "info")
            click.echo(f"{deviation.name}: simulated {deviation.simulated:.6g}, "
                       f"analytic {deviation.analytic:.6g}, {100 * deviation.relative:.2f} % {status}")
        if summary.note:
            click.echo(summary.note)
        passed = summary.passed
    _manifest("simulate", config, out_dir, files, fmt)
    if not passed:
        sys.exit(EXIT_DEVIATION)


@cli.command("reproduce-tables")
@click.option("--table", "tables", multiple=True, type=click.Choice(table_names()),
              help="Reproduce only these targets; repeatable.")
@click.option("--rel-tol", type=click.FloatRange(min=0.0), default=DEFAULT_REL_TOLERANCE, show_default=True,
              help="Relative tolerance per golden cell.")
@_output_options
@click.pass_obj
def reproduce_tables(state: CliState, tables: Tuple[str, ...], rel_tol: float, out_dir: Path, fmt: str,
                     full_precision: bool) -> None:
    """Write the published tables and compare them with the bundled golden files."""
    config = state.config()
    names = tables or tuple(table_names())
    result = reproduce(config, out_dir, names, fmt, full_precision, rel_tol)
    failures = result.failures
    click.echo(f"{len(names)} tables, {len(result.cells)} cells, {len(failures)} outside tolerance")
    for cell in failures:
        click.echo(f"  {cell.table} row {cell.row} {cell.column}: expected {cell.expected}, got {cell.actual}")
    _manifest("reproduce-tables", config, out_dir, result.files, fmt, names)
    if failures:
        sys.exit(EXIT_DEVIATION)


def main(argv: Optional[Sequence[str]] = None) -> None:
    cli.main(args=list(argv) if argv is not None else None, prog_name="fogduty")


__all__ = ["RunManifest", "cli", "main"]
