from .config import ArrivalModel, EmergencyScenario, ServiceModel, SimConfig
from .engine import Simulation, run
from .report import SimReport, merge_reports
from .validate import Deviation, DeviationSummary, compare_with_analytic

__all__ = [
    "ArrivalModel",
    "Deviation",
    "DeviationSummary",
    "EmergencyScenario",
    "ServiceModel",
    "SimConfig",
    "SimReport",
    "Simulation",
    "compare_with_analytic",
    "merge_reports",
    "run",
]
