"""Simulated figures against the closed-form queue and energy models."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

from ..energy import EnergyModel
from ..errors import ConfigMismatch, EmptySample
from ..queueing import QueueModel, mean_in_system, sojourn_time
from .config import ArrivalModel, ServiceModel
from .report import DEVICE, SimReport

_logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.10
_REL = 1e-9


@dataclass(frozen=True)
class Deviation:
    name: str
    simulated: float
    analytic: float
    tolerance: float
    enforced: bool = True

    @property
    def relative(self) -> float:
        if self.analytic == 0:
            return 0.0 if self.simulated == 0 else math.inf
        return abs(self.simulated - self.analytic) / abs(self.analytic)

    @property
    def passed(self) -> bool:
        return self.relative <= self.tolerance


@dataclass(frozen=True)
class DeviationSummary:
    deviations: Tuple[Deviation, ...]
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(d.passed for d in self.deviations if d.enforced)

    def __getitem__(self, name: str) -> Deviation:
        for deviation in self.deviations:
            if deviation.name == name:
                return deviation
        raise KeyError(name)

    def to_dict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "note": self.note,
            "deviations": {
                d.name: {"simulated": d.simulated, "analytic": d.analytic, "relative": d.relative,
                         "tolerance": d.tolerance, "enforced": d.enforced, "passed": d.passed}
                for d in self.deviations
            },
        }


def _check(field: str, report_value: float, model_value: float) -> None:
    if not math.isclose(report_value, model_value, rel_tol=_REL, abs_tol=_REL):
        raise ConfigMismatch(field, report_value, model_value)


def compare_with_analytic(report: SimReport, queue_model: QueueModel, energy_model: EnergyModel,
                          tolerance: float = DEFAULT_TOLERANCE) -> DeviationSummary:
    """Relative deviations of occupancy, sojourn and device energy.

    Queue figures are only enforced for Poisson arrivals with exponential
    service, the case the M/M/1 formulas describe; other runs report the gap.
    """
    if report.horizon_s <= 0 or report.served.get(DEVICE, 0) == 0:
        raise EmptySample("device reports")
    _check("service_rate_pps", report.service_rate_pps, queue_model.service_rate_pps)
    _check("feedback_fraction", report.feedback_fraction, queue_model.feedback_fraction)
    _check("arrival_rate_pps", report.configured_arrival_rate_pps, queue_model.arrival_rate_pps)
    _check("cycle_s", report.cycle_s, energy_model.duty.cycle_s)

    markovian = (report.arrival_model == ArrivalModel.POISSON_APPROX.value
                 and report.service_model == ServiceModel.EXPONENTIAL.value)
    lam, mu = queue_model.arrival_rate_pps, queue_model.effective_service_rate_pps
    deviations = (
        Deviation("occupancy", report.mean_in_system, mean_in_system(lam, mu), tolerance, markovian),
        Deviation("sojourn", report.mean_sojourn_s, sojourn_time(lam, mu), tolerance, markovian),
        Deviation("energy", report.device_rate_mwh_per_s, energy_model.rate_mwh_per_s, tolerance),
    )
    note = "" if markovian else (
        f"{report.arrival_model} arrivals with {report.service_model} service: "
        "queue deviations are reported, not enforced")
    summary = DeviationSummary(deviations, note)
    for deviation in deviations:
        if deviation.enforced and not deviation.passed:
            _logger.warning("%s deviates %.1f%% from the analytic value", deviation.name,
                            100.0 * deviation.relative)
    return summary
