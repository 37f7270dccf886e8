import pytest
from hypothesis import given, settings, strategies as st

from fogduty.errors import ControlValueOutOfRange, InvalidIdentifier, MalformedFrame, TruncatedFrame, ValidationError
from fogduty.protocol.frames import (CONTROL_PACKET_LEN, RADIO_FRAME_LEN, SENSOR_FRAME_LEN, ControlKind,
                                     ControlMessage, ControlPacket, ModeValue, RadioFrame, RadioFrameType,
                                     SensorFrame, SensorPayload, hexdump)

u8 = st.integers(0, 0xFF)
u16 = st.integers(0, 0xFFFF)

payloads = st.builds(SensorPayload, u8, u8, u16, u8, u8, u8)
sensor_frames = st.builds(SensorFrame, u16, payloads)
control_messages = st.one_of(
    st.builds(ControlMessage.alarm, st.booleans()),
    st.builds(ControlMessage.sleep_time, st.integers(0, 3)),
    st.builds(ControlMessage.long_sleep, u8),
    st.builds(ControlMessage.mode, st.sampled_from(ModeValue)),
)
control_packets = st.builds(ControlPacket, u16, control_messages)


class TestLayouts:

    def test_sensor_frame_bytes(self):
        frame = SensorFrame(0x1234, SensorPayload(21, 40, 0x0102, 0, 1, 90))
        assert frame.encode() == bytes([0x11, 0x12, 0x34, 21, 40, 0x01, 0x02, 0, 1, 90])

    def test_control_packet_bytes(self):
        packet = ControlPacket(0x00AB, ControlMessage.mode(ModeValue.AWAY))
        assert packet.encode() == b"\x11\x00\xabdA"
        assert len(packet.encode()) == CONTROL_PACKET_LEN

    def test_alarm_values(self):
        assert ControlMessage.alarm(True).encode() == b"aL"
        assert ControlMessage.alarm(False).encode() == b"aD"

    def test_single_character_value(self):
        assert ControlMessage("d", "E").value == ModeValue.EMERGENCY

    def test_radio_frame_layout(self):
        inner = SensorFrame(0x0001)
        data = RadioFrame.wrap_sensor(inner, 0x0013A20040A1B2C3).encode()
        assert len(data) == RADIO_FRAME_LEN
        assert data[:3] == b"\x7e\x00\x16"
        assert data[3] == RadioFrameType.RECEIVE
        assert data[15:] == inner.encode()

    def test_control_packet_is_padded(self):
        packet = ControlPacket(7, ControlMessage.sleep_time(2))
        radio = RadioFrame.wrap_control(packet, 1)
        assert radio.strip() == packet.encode() + bytes(SENSOR_FRAME_LEN - CONTROL_PACKET_LEN)
        assert RadioFrame.decode(radio.encode()).control_packet() == packet


class TestRoundTrip:

    @settings(max_examples=10_000, deadline=None)
    @given(sensor_frames, control_packets, st.integers(0, 2 ** 64 - 1), u8)
    def test_decode_inverts_encode(self, frame, packet, long_addr, frame_id):
        assert SensorFrame.decode(frame.encode()) == frame
        assert ControlPacket.decode(packet.encode()) == packet
        radio = RadioFrame.wrap_sensor(frame, long_addr, frame_id)
        assert RadioFrame.decode(radio.encode()).sensor_frame() == frame


class TestErrors:

    def test_bad_identifier(self):
        data = bytearray(SensorFrame(1).encode())
        data[0] = 0x12
        with pytest.raises(InvalidIdentifier):
            SensorFrame.decode(bytes(data))

    @pytest.mark.parametrize("decode, size", [
        (SensorFrame.decode, SENSOR_FRAME_LEN), (ControlPacket.decode, CONTROL_PACKET_LEN),
        (RadioFrame.decode, RADIO_FRAME_LEN)])
    def test_truncated(self, decode, size):
        data = {SENSOR_FRAME_LEN: SensorFrame(1).encode(),
                CONTROL_PACKET_LEN: ControlPacket(1, ControlMessage.alarm(True)).encode(),
                RADIO_FRAME_LEN: RadioFrame.wrap_sensor(SensorFrame(1), 2).encode()}[size]
        with pytest.raises(TruncatedFrame):
            decode(data[:-1])

    def test_empty_buffer(self):
        with pytest.raises(TruncatedFrame):
            SensorFrame.decode(b"")

    def test_radio_delimiter(self):
        data = b"\x7f" + RadioFrame.wrap_sensor(SensorFrame(1), 2).encode()[1:]
        with pytest.raises(InvalidIdentifier):
            RadioFrame.decode(data)

    def test_radio_frame_type(self):
        data = bytearray(RadioFrame.wrap_sensor(SensorFrame(1), 2).encode())
        data[3] = 0x20
        with pytest.raises(InvalidIdentifier):
            RadioFrame.decode(bytes(data))

    def test_radio_length_field(self):
        data = bytearray(RadioFrame.wrap_sensor(SensorFrame(1), 2).encode())
        data[2] = 0x15
        with pytest.raises(MalformedFrame) as caught:
            RadioFrame.decode(bytes(data))
        assert (caught.value.found, caught.value.expected) == (21, 22)

    @pytest.mark.parametrize("kind, value", [
        (ControlKind.SLEEP_TIME, 4), (ControlKind.ALARM, ord("X")), (ControlKind.MODE, ord("Z")),
        ("z", 1), (ControlKind.LONG_SLEEP, 256), (ControlKind.SLEEP_TIME, True)])
    def test_control_out_of_range(self, kind, value):
        with pytest.raises(ControlValueOutOfRange):
            ControlMessage(kind, value)

    def test_decoded_kind_out_of_range(self):
        with pytest.raises(ControlValueOutOfRange):
            ControlMessage.decode(b"\xff\x00")

    def test_field_widths(self):
        with pytest.raises(ValidationError):
            SensorFrame(0x10000)
        with pytest.raises(ValidationError):
            SensorPayload(temperature=256)
        with pytest.raises(ValidationError):
            RadioFrame(RadioFrameType.TRANSMIT, 1, 1, bytes(11))


def test_hexdump():
    assert hexdump(b"aL") == "0000  61 4c" + " " * 42 + "  aL"
    assert hexdump(bytes(17)).count("\n") == 1
