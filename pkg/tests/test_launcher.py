import pytest

from fogduty.errors import (ConfigError, ControlValueOutOfRange, FogDutyError, RegulatoryViolation,
                            TruncatedFrame, ValidationError)
from fogduty.launcher import (COPY_METHOD, USAGE, LauncherSettings, decode_frame, error_rows, error_types,
                              export_table, handle_query)
from fogduty.protocol import ControlMessage, ControlPacket, RadioFrame, SensorFrame, SensorPayload

SENSOR = SensorFrame(0x0001, SensorPayload(21, 40, 258, 0, 1, 90))


def titles(rows):
    return [row.Title for row in rows]


class TestQueries:

    def test_empty_query_lists_commands(self, reference):
        assert titles(handle_query("  ", reference)) == [command for command, _ in USAGE]

    def test_unknown_command(self, reference):
        rows = handle_query("battery 3", reference)
        assert rows[0].Title == "Unknown command: battery"
        assert len(rows) == 1 + len(USAGE)

    def test_long_sleep(self, reference):
        rows = handle_query("ls", reference)
        assert titles(rows)[:2] == ["condo E 61.51 %", "condo ES 3.11 %"]
        assert len(rows) == 2 + len(reference.schedule.groups)
        assert rows[0].JsonRPCAction == {"method": COPY_METHOD, "parameters": ["61.51"]}
        assert rows[0].ContextData == ["61.51", "condominium-savings"]

    def test_long_sleep_setting(self, reference):
        rows = handle_query("ls", reference, LauncherSettings(ls_s=58))
        assert "LS=58 s" in rows[0].SubTitle

    def test_energy(self, reference):
        rows = handle_query("energy 3", reference)
        assert rows[0].Title == "0.543649 mWh per cycle"
        assert rows[2].SubTitle == "300 devices"

    def test_energy_over_the_response_limit(self, reference):
        with pytest.raises(RegulatoryViolation):
            handle_query("energy 4", reference)

    def test_queue(self, reference):
        assert titles(handle_query("queue 0", reference)) == ["352 ms E{T}", "rho 0.260"]

    @pytest.mark.parametrize("query, sleep", [
        ("sleep", "T = 2.88 s"), ("sleep 0.01", "T = 2.87 s"), ("sleep mist 5%", "T = 2.80 s"),
        ("SLEEP mist", "T = 2.82 s")])
    def test_sleep(self, reference, query, sleep):
        assert handle_query(query, reference)[0].Title == sleep

    def test_sleep_uses_feedback_setting(self, reference):
        rows = handle_query("sleep", reference, LauncherSettings(feedback=0.1))
        assert rows[0].Title == "T = 2.86 s"

    def test_bad_number(self, reference):
        with pytest.raises(ValidationError):
            handle_query("queue soon", reference)


class TestFrames:

    def test_sensor_frame(self, reference):
        rows = handle_query(f"frame {SENSOR.encode().hex()}", reference)
        assert titles(rows) == ["sensor from 0x0001",
                                "temperature 21, humidity 40, gas 258, flame 0, state 1, battery 90"]
        assert rows[0].SubTitle.startswith("0000  11 00 01")

    def test_radio_frame(self):
        data = RadioFrame.wrap_sensor(SENSOR, 0x0013A20040A1B2C3).encode()
        assert decode_frame(data)[:2] == ["radio receive long 0x0013a20040a1b2c3 short 0x0001",
                                          "sensor from 0x0001"]

    def test_control(self):
        assert decode_frame(bytes.fromhex("6441")) == ["control mode A"]
        packet = ControlPacket(0x000A, ControlMessage.sleep_time(2)).encode()
        assert decode_frame(packet) == ["control to 0x000a", "control sleep_time 2"]
        radio = RadioFrame.wrap_control(ControlPacket(3, ControlMessage.alarm(True)), 0x10000).encode()
        assert decode_frame(radio)[1:] == ["control to 0x0003", "control alarm L"]

    def test_spaces_in_hex(self, reference):
        assert titles(handle_query("frame 64 41", reference)) == ["control mode A"]

    @pytest.mark.parametrize("text", ["zz", "112233"])
    def test_invalid_frames(self, reference, text):
        with pytest.raises(ValidationError):
            handle_query(f"frame {text}", reference)

    def test_frame_errors_propagate(self):
        with pytest.raises(ControlValueOutOfRange):
            decode_frame(b"d?")
        data = bytearray(SENSOR.encode())
        data[0] = 0x7E
        with pytest.raises(FogDutyError):
            decode_frame(bytes(data))


class TestSettings:

    def test_from_form(self):
        settings = LauncherSettings.from_mapping({"config_path": "a.yaml", "ls": "8", "feedback": ""}, {})
        assert settings == LauncherSettings("a.yaml", 8.0, 0.0)

    def test_environment_wins(self):
        settings = LauncherSettings.from_mapping({"config_path": "a.yaml"}, {"FOGDUTY_CONFIG": "b.yaml"})
        assert settings.config_path == "b.yaml"

    def test_empty_form(self):
        assert LauncherSettings.from_mapping({}, {}) == LauncherSettings()

    def test_bad_number(self):
        with pytest.raises(ValidationError):
            LauncherSettings.from_mapping({"ls": "long"}, {})


def test_error_handlers_cover_every_error():
    types = error_types()
    for cls in (FogDutyError, ValidationError, ConfigError, RegulatoryViolation, TruncatedFrame):
        assert cls in types


def test_error_rows():
    (row,) = error_rows(TruncatedFrame(3, 10))
    assert row.Title == "Error: TruncatedFrame"
    assert "needs 10" in row.SubTitle


def test_export_table(reference, tmp_path):
    path = export_table("coordinator-queue", reference, tmp_path)
    assert path == tmp_path / "coordinator-queue.csv"
    assert path.read_text(encoding="utf-8").startswith("T,lambda_pps")
