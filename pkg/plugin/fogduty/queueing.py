"""Analytic models for the coordinator's serial-link queue.

The coordinator drains the radio through a serial port, so its service rate is the
link speed divided by the packet size in bits. Feedback control traffic reserves a
fraction of that rate and leaves the rest to device reports; Mist and Fog queues in
tandem collapse into one queue whose packet is the sum of the stage packets.

``system_time`` keeps the coordinator delay figure in its historical form
lambda / (mu - lambda), which is the M/M/1 mean number in system. The textbook
sojourn 1 / (mu - lambda) is ``sojourn_time``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import InfeasibleSleep, QueueUnstable, ValidationError

_logger = logging.getLogger(__name__)

BITS_PER_BYTE = 8
DEFAULT_LINK_SPEED_BPS = 115200
SLEEP_BUDGET_S = 3.0
SLEEP_GRID_S = 0.01


@dataclass(frozen=True)
class LinkSpec:
    speed_bps: float = DEFAULT_LINK_SPEED_BPS
    packet_bytes: float = 25

    def __post_init__(self) -> None:
        if not self.speed_bps > 0:
            raise ValidationError("link.speed_bps", self.speed_bps, "must be > 0")
        if not self.packet_bytes > 0:
            raise ValidationError("link.packet_bytes", self.packet_bytes, "must be > 0")

    def with_packet(self, packet_bytes: float) -> "LinkSpec":
        return replace(self, packet_bytes=packet_bytes)


@dataclass(frozen=True)
class QueueModel:
    arrival_rate_pps: float
    service_rate_pps: float
    feedback_fraction: float = 0.0
    packet_bytes: Optional[float] = None
    feedback_packet_bytes: Optional[float] = None

    def __post_init__(self) -> None:
        if self.arrival_rate_pps < 0:
            raise ValidationError("arrival_rate_pps", self.arrival_rate_pps, "must be >= 0")
        if not self.service_rate_pps > 0:
            raise ValidationError("service_rate_pps", self.service_rate_pps, "must be > 0")
        if not 0.0 <= self.feedback_fraction < 1.0:
            raise ValidationError("feedback_fraction", self.feedback_fraction, "must be within [0, 1)")

    @property
    def effective_service_rate_pps(self) -> float:
        return (1.0 - self.feedback_fraction) * self.service_rate_pps

    @property
    def feedback_rate_pps(self) -> float:
        return self.feedback_fraction * self.service_rate_pps

    @property
    def is_stable(self) -> bool:
        return self.arrival_rate_pps < self.effective_service_rate_pps

    def with_arrival_rate(self, arrival_rate_pps: float) -> "QueueModel":
        return replace(self, arrival_rate_pps=arrival_rate_pps)

    def with_feedback(self, feedback_fraction: float) -> "QueueModel":
        return replace(self, feedback_fraction=feedback_fraction)

    def whole_packets(self) -> "QueueModel":
        """Same queue with the service rate rounded to whole packets per second."""
        return replace(self, service_rate_pps=float(round(self.service_rate_pps)))

    def metrics(self, sleep_s: float = 0.0, active_s: Optional[float] = None) -> "QueueMetrics":
        return _metrics(self.arrival_rate_pps, self.service_rate_pps, self.feedback_fraction,
                        sleep_s, active_s)


@dataclass(frozen=True)
class QueueMetrics:
    arrival_rate_pps: float
    effective_service_rate_pps: float
    load: float
    system_time_s: float
    sleep_s: float = 0.0
    total_time_s: float = 0.0
    savings_pct: Optional[float] = None
    feedback_rate_pps: float = 0.0

    @property
    def system_time_ms(self) -> float:
        return 1000.0 * self.system_time_s


@dataclass(frozen=True)
class SleepPlan:
    sleep_s: float
    metrics: QueueMetrics
    feedback_fraction: float
    budget_s: float


def service_rate(link: LinkSpec) -> float:
    """Packets per second the serial link drains."""
    return link.speed_bps / (BITS_PER_BYTE * link.packet_bytes)


def arrival_rate(fleet_size: int, cycle_s: float) -> float:
    """Packets per second when every device sends one packet per cycle."""
    if fleet_size < 0:
        raise ValidationError("fleet_size", fleet_size, "must be >= 0")
    if not cycle_s > 0:
        raise ZeroDivisionError("cycle length must be > 0")
    return fleet_size / cycle_s


def load(arrival_rate_pps: float, service_rate_pps: float) -> float:
    if not service_rate_pps > 0:
        raise ValidationError("service_rate_pps", service_rate_pps, "must be > 0")
    return arrival_rate_pps / service_rate_pps


def system_time(arrival_rate_pps: float, service_rate_pps: float) -> float:
    """Coordinator delay figure lambda / (mu - lambda)."""
    if arrival_rate_pps >= service_rate_pps:
        raise QueueUnstable(arrival_rate_pps, service_rate_pps)
    return arrival_rate_pps / (service_rate_pps - arrival_rate_pps)


def sojourn_time(arrival_rate_pps: float, service_rate_pps: float) -> float:
    """Mean time a packet spends in an M/M/1 system, waiting plus service."""
    if arrival_rate_pps >= service_rate_pps:
        raise QueueUnstable(arrival_rate_pps, service_rate_pps)
    return 1.0 / (service_rate_pps - arrival_rate_pps)


def mean_in_system(arrival_rate_pps: float, service_rate_pps: float) -> float:
    rho = load(arrival_rate_pps, service_rate_pps)
    if rho >= 1.0:
        raise QueueUnstable(arrival_rate_pps, service_rate_pps)
    return rho / (1.0 - rho)


def sleep_savings(sleep_s: float, active_s: float) -> float:
    """Share of the cycle spent asleep, in percent."""
    return 100.0 * sleep_s / (active_s + sleep_s)


def _metrics(arrival_rate_pps: float, service_rate_pps: float, feedback_fraction: float,
             sleep_s: float, active_s: Optional[float]) -> QueueMetrics:
    effective = (1.0 - feedback_fraction) * service_rate_pps
    delay = system_time(arrival_rate_pps, effective)
    return QueueMetrics(
        arrival_rate_pps=arrival_rate_pps,
        effective_service_rate_pps=effective,
        load=load(arrival_rate_pps, effective),
        system_time_s=delay,
        sleep_s=sleep_s,
        total_time_s=delay + sleep_s,
        savings_pct=None if active_s is None else sleep_savings(sleep_s, active_s),
        feedback_rate_pps=feedback_fraction * service_rate_pps,
    )


def feedback_metrics(arrival_rate_pps: float, service_rate_pps: float, feedback_fraction: float,
                     sleep_s: float = 0.0, active_s: Optional[float] = None) -> QueueMetrics:
    """Metrics for device reports when `feedback_fraction` of the service rate carries control traffic.

    Each queue in the feedback network behaves as an independent queue, so the
    external stream sees the reduced rate (1 - f) * mu.
    """
    return QueueModel(arrival_rate_pps, service_rate_pps, feedback_fraction).metrics(sleep_s, active_s)


def tandem_combined(arrival_rate_pps: float, stage_packet_bytes: Sequence[float], link: LinkSpec,
                    feedback_fraction: float = 0.0,
                    feedback_stage_bytes: Sequence[float] = ()) -> QueueModel:
    """Collapse queues in tandem into one queue carrying the summed packet size.

    Departures of an M/M/1 stage with Poisson input are Poisson, so stages are
    independent and their delays add; one queue with the summed packet represents
    the whole chain.
    """
    stages = [float(size) for size in stage_packet_bytes]
    if not stages:
        raise ValidationError("stage_packet_bytes", stage_packet_bytes, "needs at least one stage")
    packet = math.fsum(stages)
    feedback_packet = math.fsum(float(size) for size in feedback_stage_bytes) or None
    return QueueModel(
        arrival_rate_pps=arrival_rate_pps,
        service_rate_pps=service_rate(link.with_packet(packet)),
        feedback_fraction=feedback_fraction,
        packet_bytes=packet,
        feedback_packet_bytes=feedback_packet,
    )


def max_sleep(fleet_size: int, active_s: float, service_rate_pps: float,
              feedback_fraction: float = 0.0, budget_s: float = SLEEP_BUDGET_S,
              step_s: float = SLEEP_GRID_S) -> SleepPlan:
    """Largest sleep T on the grid with system_time + T within the budget.

    Every grid point up to the budget is checked, so the result is the grid
    maximum even if the total time is not monotone in T.
    """
    if not budget_s > 0:
        raise ValidationError("budget_s", budget_s, "must be > 0")
    if not step_s > 0:
        raise ValidationError("step_s", step_s, "must be > 0")
    effective = (1.0 - feedback_fraction) * service_rate_pps
    best: Optional[Tuple[float, QueueMetrics]] = None
    for index in range(int(math.floor(budget_s / step_s + 1e-9)) + 1):
        sleep_s = round(index * step_s, 10)
        lam = arrival_rate(fleet_size, active_s + sleep_s)
        if lam >= effective:
            continue
        metrics = _metrics(lam, service_rate_pps, feedback_fraction, sleep_s, active_s)
        if metrics.total_time_s <= budget_s:
            best = (sleep_s, metrics)
    if best is None:
        raise InfeasibleSleep(budget_s)
    _logger.debug("max sleep %.2f s (f=%.2f, mu=%.2f, TT=%.4f)",
                  best[0], feedback_fraction, service_rate_pps, best[1].total_time_s)
    return SleepPlan(sleep_s=best[0], metrics=best[1], feedback_fraction=feedback_fraction,
                     budget_s=budget_s)


def coordinator_sweep(fleet_size: int, active_s: float, sleep_values: Iterable[float],
                      service_rate_pps: float, feedback_fraction: float = 0.0) -> List[QueueMetrics]:
    """Queue metrics at the coordinator for each regular sleep value."""
    rows = []
    for sleep_s in sleep_values:
        lam = arrival_rate(fleet_size, active_s + sleep_s)
        rows.append(_metrics(lam, service_rate_pps, feedback_fraction, float(sleep_s), active_s))
    return rows
