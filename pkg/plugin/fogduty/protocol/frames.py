"""Byte layouts of the Fog/Mist control protocol.

All multi-byte integers are big-endian.

    SensorFrame    (10)  0x11 | source u16 | payload (7)
    SensorPayload  (7)   temperature u8 | humidity u8 | gas u16 | flame u8 | state u8 | battery u8
    ControlMessage (2)   kind ascii | value u8
    ControlPacket  (5)   0x11 | destination u16 | ControlMessage
    RadioFrame     (25)  0x7E | length u16 | frame type u8 | frame id u8 | addr64 | addr16 | inner (10)

A Mist node strips the 15-byte radio header from sensor traffic and rebuilds it
around control packets on the way back, padding them to the 10-byte inner size.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum, IntEnum

from ..errors import (ControlValueOutOfRange, FrameLengthError, InvalidIdentifier, MalformedFrame,
                      TruncatedFrame, ValidationError)

IDENTIFIER = 0x11
RADIO_DELIMITER = 0x7E

SENSOR_FRAME_LEN = 10
SENSOR_PAYLOAD_LEN = 7
CONTROL_MESSAGE_LEN = 2
CONTROL_PACKET_LEN = 5
RADIO_HEADER_LEN = 15
RADIO_FRAME_LEN = 25
INNER_FRAME_LEN = RADIO_FRAME_LEN - RADIO_HEADER_LEN

MAX_REGULAR_SLEEP = 3

_PAYLOAD = struct.Struct(">BBHBBB")
_ADDRESSED = struct.Struct(">BH")
_CONTROL = struct.Struct(">cB")
_RADIO_HEADER = struct.Struct(">BHBBQH")


def _u16(name: str, value: int) -> int:
    if not 0 <= value <= 0xFFFF:
        raise ValidationError(name, value, "must fit 16 bits")
    return value


def _u8(name: str, value: int) -> int:
    if not 0 <= value <= 0xFF:
        raise ValidationError(name, value, "must fit 8 bits")
    return value


def _need(data: bytes, size: int) -> None:
    if len(data) < size:
        raise TruncatedFrame(len(data), size)


def _check_length(name: str, encoded: bytes, expected: int) -> bytes:
    if len(encoded) != expected:
        raise FrameLengthError(name, len(encoded), expected)
    return encoded


def _identifier(found: int) -> None:
    if found != IDENTIFIER:
        raise InvalidIdentifier(found, IDENTIFIER)


@dataclass(frozen=True)
class SensorPayload:
    temperature: int = 0
    humidity: int = 0
    gas_level: int = 0
    flame: int = 0
    state: int = 0
    battery: int = 0

    def __post_init__(self) -> None:
        for name in ("temperature", "humidity", "flame", "state", "battery"):
            _u8(name, getattr(self, name))
        _u16("gas_level", self.gas_level)

    def encode(self) -> bytes:
        return _PAYLOAD.pack(self.temperature, self.humidity, self.gas_level,
                             self.flame, self.state, self.battery)

    @classmethod
    def decode(cls, data: bytes) -> "SensorPayload":
        _need(data, SENSOR_PAYLOAD_LEN)
        return cls(*_PAYLOAD.unpack_from(data))


@dataclass(frozen=True)
class SensorFrame:
    source_addr: int
    payload: SensorPayload = field(default_factory=SensorPayload)
    identifier: int = IDENTIFIER

    def __post_init__(self) -> None:
        _u16("source_addr", self.source_addr)
        _identifier(self.identifier)

    def encode(self) -> bytes:
        encoded = _ADDRESSED.pack(self.identifier, self.source_addr) + self.payload.encode()
        return _check_length("SensorFrame", encoded, SENSOR_FRAME_LEN)

    @classmethod
    def decode(cls, data: bytes) -> "SensorFrame":
        _need(data, 1)
        _identifier(data[0])
        _need(data, SENSOR_FRAME_LEN)
        identifier, source = _ADDRESSED.unpack_from(data)
        return cls(source, SensorPayload.decode(data[_ADDRESSED.size:SENSOR_FRAME_LEN]), identifier)


class ControlKind(str, Enum):
    ALARM = "a"
    SLEEP_TIME = "b"
    LONG_SLEEP = "c"
    MODE = "d"


class AlarmValue(IntEnum):
    ON = ord("L")
    OFF = ord("D")


class ModeValue(IntEnum):
    REGULAR = ord("R")
    EMERGENCY = ord("E")
    AWAY = ord("A")


@dataclass(frozen=True)
class ControlMessage:
    kind: ControlKind
    value: int

    def __post_init__(self) -> None:
        try:
            kind = ControlKind(self.kind)
        except ValueError:
            raise ControlValueOutOfRange(str(self.kind), self.value) from None
        object.__setattr__(self, "kind", kind)
        if isinstance(self.value, str) and len(self.value) == 1:
            object.__setattr__(self, "value", ord(self.value))
        if isinstance(self.value, bool) or not isinstance(self.value, int) or not self._valid(kind, self.value):
            raise ControlValueOutOfRange(kind.value, self.value)
        object.__setattr__(self, "value", int(self.value))

    @staticmethod
    def _valid(kind: ControlKind, value: int) -> bool:
        if kind is ControlKind.ALARM:
            return value in (AlarmValue.ON, AlarmValue.OFF)
        if kind is ControlKind.SLEEP_TIME:
            return 0 <= value <= MAX_REGULAR_SLEEP
        if kind is ControlKind.MODE:
            return value in tuple(ModeValue)
        return 0 <= value <= 0xFF

    @classmethod
    def alarm(cls, on: bool) -> "ControlMessage":
        return cls(ControlKind.ALARM, AlarmValue.ON if on else AlarmValue.OFF)

    @classmethod
    def sleep_time(cls, seconds: int) -> "ControlMessage":
        return cls(ControlKind.SLEEP_TIME, seconds)

    @classmethod
    def long_sleep(cls, seconds: int) -> "ControlMessage":
        return cls(ControlKind.LONG_SLEEP, seconds)

    @classmethod
    def mode(cls, mode: ModeValue) -> "ControlMessage":
        return cls(ControlKind.MODE, mode)

    def encode(self) -> bytes:
        encoded = _CONTROL.pack(self.kind.value.encode("ascii"), int(self.value))
        return _check_length("ControlMessage", encoded, CONTROL_MESSAGE_LEN)

    @classmethod
    def decode(cls, data: bytes) -> "ControlMessage":
        _need(data, CONTROL_MESSAGE_LEN)
        kind, value = _CONTROL.unpack_from(data)
        return cls(kind.decode("latin-1"), value)


@dataclass(frozen=True)
class ControlPacket:
    dest_addr: int
    control: ControlMessage
    identifier: int = IDENTIFIER

    def __post_init__(self) -> None:
        _u16("dest_addr", self.dest_addr)
        _identifier(self.identifier)

    def encode(self) -> bytes:
        encoded = _ADDRESSED.pack(self.identifier, self.dest_addr) + self.control.encode()
        return _check_length("ControlPacket", encoded, CONTROL_PACKET_LEN)

    @classmethod
    def decode(cls, data: bytes) -> "ControlPacket":
        _need(data, 1)
        _identifier(data[0])
        _need(data, CONTROL_PACKET_LEN)
        identifier, dest = _ADDRESSED.unpack_from(data)
        return cls(dest, ControlMessage.decode(data[_ADDRESSED.size:CONTROL_PACKET_LEN]), identifier)


class RadioFrameType(IntEnum):
    TRANSMIT = 0x10
    RECEIVE = 0x90


@dataclass(frozen=True)
class RadioFrame:
    frame_type: RadioFrameType
    long_addr: int
    short_addr: int
    inner: bytes
    frame_id: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "frame_type", RadioFrameType(self.frame_type))
        if not 0 <= self.long_addr <= 0xFFFFFFFFFFFFFFFF:
            raise ValidationError("long_addr", self.long_addr, "must fit 64 bits")
        _u16("short_addr", self.short_addr)
        _u8("frame_id", self.frame_id)
        inner = bytes(self.inner)
        if len(inner) > INNER_FRAME_LEN:
            raise ValidationError("inner", len(inner), f"longer than {INNER_FRAME_LEN} bytes")
        object.__setattr__(self, "inner", inner.ljust(INNER_FRAME_LEN, b"\x00"))

    @classmethod
    def wrap_sensor(cls, frame: SensorFrame, long_addr: int, frame_id: int = 0) -> "RadioFrame":
        return cls(RadioFrameType.RECEIVE, long_addr, frame.source_addr, frame.encode(), frame_id)

    @classmethod
    def wrap_control(cls, packet: ControlPacket, long_addr: int, frame_id: int = 0) -> "RadioFrame":
        return cls(RadioFrameType.TRANSMIT, long_addr, packet.dest_addr, packet.encode(), frame_id)

    def strip(self) -> bytes:
        """The inner frame without the radio header."""
        return self.inner

    def sensor_frame(self) -> SensorFrame:
        return SensorFrame.decode(self.inner)

    def control_packet(self) -> ControlPacket:
        return ControlPacket.decode(self.inner)

    def encode(self) -> bytes:
        header = _RADIO_HEADER.pack(RADIO_DELIMITER, RADIO_FRAME_LEN - 3, int(self.frame_type),
                                    self.frame_id, self.long_addr, self.short_addr)
        return _check_length("RadioFrame", header + self.inner, RADIO_FRAME_LEN)

    @classmethod
    def decode(cls, data: bytes) -> "RadioFrame":
        _need(data, 1)
        if data[0] != RADIO_DELIMITER:
            raise InvalidIdentifier(data[0], RADIO_DELIMITER)
        _need(data, RADIO_FRAME_LEN)
        _, length, frame_type, frame_id, long_addr, short_addr = _RADIO_HEADER.unpack_from(data)
        if length != RADIO_FRAME_LEN - 3:
            raise MalformedFrame("length field", length, RADIO_FRAME_LEN - 3)
        try:
            kind = RadioFrameType(frame_type)
        except ValueError:
            raise InvalidIdentifier(frame_type, RadioFrameType.RECEIVE) from None
        return cls(kind, long_addr, short_addr, data[RADIO_HEADER_LEN:RADIO_FRAME_LEN], frame_id)


def hexdump(data: bytes, width: int = 16) -> str:
    """Offset, hex bytes and printable ASCII, one line per `width` bytes."""
    lines = []
    for offset in range(0, len(data), width):
        chunk = data[offset:offset + width]
        text = "".join(chr(b) if 0x20 <= b < 0x7F else "." for b in chunk)
        lines.append(f"{offset:04x}  {chunk.hex(' '):<{width * 3 - 1}}  {text}")
    return "\n".join(lines)
