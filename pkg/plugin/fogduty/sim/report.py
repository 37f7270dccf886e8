from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from ..energy import DEFAULT_CALENDAR, MWH_PER_KWH, Calendar, Period
from ..errors import ValidationError

DEVICE = "device"
CONTROL = "control"


@dataclass(frozen=True)
class SimReport:
    """Outcome of one run, or of several merged replications."""
    seed: int
    seeds: Tuple[int, ...]
    horizon_s: float
    fleet_size: int
    arrival_model: str
    service_model: str
    cycle_s: float
    configured_arrival_rate_pps: float
    service_rate_pps: float
    feedback_fraction: float
    sent: Mapping[str, int]
    served: Mapping[str, int]
    in_queue: Mapping[str, int]
    saturated: bool
    mean_in_system: float
    mean_sojourn_s: float
    arrival_rate_pps: float
    littles_residual: float
    device_energy_mwh: Tuple[float, ...]
    device_cycles: Tuple[int, ...]
    energy_mwh: float
    savings_pct: Optional[float]
    kwh_per: Mapping[Period, float]
    event_counts: Mapping[str, int]
    max_delivery_wait_s: float

    @staticmethod
    def scale_kwh(energy_mwh: float, horizon_s: float,
                  calendar: Calendar = DEFAULT_CALENDAR) -> Dict[Period, float]:
        """Fleet kWh per calendar period at the run's average draw."""
        rate = energy_mwh / horizon_s if horizon_s > 0 else 0.0
        return {p: rate * calendar.seconds(p) / MWH_PER_KWH for p in Period}

    @property
    def energy_per_cycle_mwh(self) -> float:
        cycles = sum(self.device_cycles)
        return self.energy_mwh / cycles if cycles else 0.0

    @property
    def device_rate_mwh_per_s(self) -> float:
        """Average draw of one device over the run."""
        if not self.fleet_size or self.horizon_s <= 0:
            return 0.0
        return self.energy_mwh / (self.fleet_size * self.horizon_s)

    def conserved(self) -> bool:
        return all(self.sent[k] == self.served[k] + self.in_queue[k] for k in self.sent)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["kwh_per"] = {Period(p).value: v for p, v in self.kwh_per.items()}
        data["seeds"] = list(self.seeds)
        data["device_energy_mwh"] = list(self.device_energy_mwh)
        data["device_cycles"] = list(self.device_cycles)
        data["energy_per_cycle_mwh"] = self.energy_per_cycle_mwh
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_rows(self) -> List[Tuple[str, Any]]:
        """(metric, value) pairs for a two-column CSV; per-device lists are summarised."""
        rows: List[Tuple[str, Any]] = [
            ("seeds", " ".join(str(s) for s in self.seeds)),
            ("horizon_s", self.horizon_s),
            ("fleet_size", self.fleet_size),
            ("arrival_model", self.arrival_model),
            ("service_model", self.service_model),
            ("arrival_rate_pps", self.arrival_rate_pps),
            ("service_rate_pps", self.service_rate_pps),
            ("feedback_fraction", self.feedback_fraction),
            ("saturated", self.saturated),
            ("mean_in_system", self.mean_in_system),
            ("mean_sojourn_s", self.mean_sojourn_s),
            ("littles_residual", self.littles_residual),
            ("energy_mwh", self.energy_mwh),
            ("energy_per_cycle_mwh", self.energy_per_cycle_mwh),
            ("savings_pct", "" if self.savings_pct is None else self.savings_pct),
            ("max_delivery_wait_s", self.max_delivery_wait_s),
        ]
        for kind in sorted(self.sent):
            rows += [(f"sent.{kind}", self.sent[kind]), (f"served.{kind}", self.served[kind]),
                     (f"in_queue.{kind}", self.in_queue[kind])]
        rows += [(f"kwh_per.{Period(p).value}", v) for p, v in self.kwh_per.items()]
        rows += [(f"events.{k}", v) for k, v in sorted(self.event_counts.items())]
        return rows


def _sum_counts(maps: Sequence[Mapping[str, int]]) -> Dict[str, int]:
    keys = sorted({key for mapping in maps for key in mapping})
    return {key: sum(mapping.get(key, 0) for mapping in maps) for key in keys}


def merge_reports(reports: Sequence[SimReport]) -> SimReport:
    """Pool replications of one configuration run with different seeds."""
    if not reports:
        raise ValidationError("reports", reports, "nothing to merge")
    first = reports[0]
    for report in reports[1:]:
        for name in ("fleet_size", "arrival_model", "service_model", "cycle_s", "service_rate_pps",
                     "feedback_fraction"):
            if getattr(report, name) != getattr(first, name):
                raise ValidationError(name, getattr(report, name), "replications differ")
    horizon = math.fsum(r.horizon_s for r in reports)
    served_device = sum(r.served.get(DEVICE, 0) for r in reports)
    sent_device = sum(r.sent.get(DEVICE, 0) for r in reports)
    mean_in_system = math.fsum(r.mean_in_system * r.horizon_s for r in reports) / horizon
    sojourn = (math.fsum(r.mean_sojourn_s * r.served.get(DEVICE, 0) for r in reports) / served_device
               if served_device else 0.0)
    observed = sent_device / horizon
    residual = abs(mean_in_system - observed * sojourn) / mean_in_system if mean_in_system > 0 else 0.0
    energies = tuple(math.fsum(values) for values in zip(*(r.device_energy_mwh for r in reports)))
    cycles = tuple(sum(values) for values in zip(*(r.device_cycles for r in reports)))
    energy = math.fsum(r.energy_mwh for r in reports)
    savings = [r.savings_pct for r in reports if r.savings_pct is not None]
    return SimReport(
        seed=first.seed,
        seeds=tuple(s for r in reports for s in r.seeds),
        horizon_s=horizon,
        fleet_size=first.fleet_size,
        arrival_model=first.arrival_model,
        service_model=first.service_model,
        cycle_s=first.cycle_s,
        configured_arrival_rate_pps=first.configured_arrival_rate_pps,
        service_rate_pps=first.service_rate_pps,
        feedback_fraction=first.feedback_fraction,
        sent=_sum_counts([r.sent for r in reports]),
        served=_sum_counts([r.served for r in reports]),
        in_queue=_sum_counts([r.in_queue for r in reports]),
        saturated=any(r.saturated for r in reports),
        mean_in_system=mean_in_system,
        mean_sojourn_s=sojourn,
        arrival_rate_pps=observed,
        littles_residual=residual,
        device_energy_mwh=energies,
        device_cycles=cycles,
        energy_mwh=energy,
        savings_pct=(math.fsum(s * r.horizon_s for s, r in zip(savings, reports)) / horizon
                     if len(savings) == len(reports) else None),
        kwh_per=SimReport.scale_kwh(energy, horizon),
        event_counts=_sum_counts([r.event_counts for r in reports]),
        max_delivery_wait_s=max(r.max_delivery_wait_s for r in reports),
    )
