from .addressing import AddressTable, translate
from .device import DeviceMode, DeviceState, apply_control, canonical_duty
from .frames import (AlarmValue, ControlKind, ControlMessage, ControlPacket, ModeValue,
                     RadioFrame, RadioFrameType, SensorFrame, SensorPayload, hexdump)

__all__ = [
    "AddressTable",
    "AlarmValue",
    "ControlKind",
    "ControlMessage",
    "ControlPacket",
    "DeviceMode",
    "DeviceState",
    "ModeValue",
    "RadioFrame",
    "RadioFrameType",
    "SensorFrame",
    "SensorPayload",
    "apply_control",
    "canonical_duty",
    "hexdump",
    "translate",
]
