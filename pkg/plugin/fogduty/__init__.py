"""Duty-cycle energy, coordinator queue and occupancy savings for fog-connected alarm fleets."""
import logging

from .energy import DeviceProfile, DutyCycle, EnergyModel, ModuleSpec, consumption_over
from .errors import FogDutyError
from .queueing import LinkSpec, QueueModel, max_sleep
from .schedule import OccupancyGroup, condominium_savings
from .settings import load_config

__version__ = "0.1.0"

logger = logging.getLogger(__name__)


__all__ = [
    "DeviceProfile",
    "DutyCycle",
    "EnergyModel",
    "FogDutyError",
    "LinkSpec",
    "ModuleSpec",
    "OccupancyGroup",
    "QueueModel",
    "condominium_savings",
    "consumption_over",
    "load_config",
    "max_sleep",
]
