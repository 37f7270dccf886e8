import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from fogduty.energy import (Calendar, DeviceProfile, DutyCycle, EnergyModel, Mode, ModuleSpec, Period,
                            consumption_over, consumption_rate, consumption_report, cycle_energy,
                            cycle_power, mixed_consumption, mixed_mode_savings, savings_vs_baseline, sweep)
from fogduty.errors import InvalidPeriod, RegulatoryViolation, ValidationError


class TestModuleSpec:

    def test_charge_is_per_second_charge_times_on_time(self):
        module = ModuleSpec("MQ-2 sensor", 160, 4.44e-2, 1)
        assert module.charge_mah == pytest.approx(4.44e-2)

    def test_from_current_derives_per_second_charge(self):
        module = ModuleSpec.from_current("radio", 36, 0.5)
        assert module.current_per_second_mah == pytest.approx(0.01)

    def test_inconsistent_per_second_charge_is_rejected(self):
        with pytest.raises(ValidationError):
            ModuleSpec("Arduino microprocessor (sleep-mode)", 1e-5, 2.78e-8)

    @pytest.mark.parametrize("name, ch_ma, cs_mah", [("MQ-2 sensor", 160, 4.44e-2), ("Flames sensor", 0.4, 1.11e-4)])
    def test_rows_at_the_rounding_bound_are_accepted(self, name, ch_ma, cs_mah):
        assert ModuleSpec(name, ch_ma, cs_mah, 1).current_per_second_mah == cs_mah

    def test_two_per_mille_off_is_rejected(self):
        with pytest.raises(ValidationError):
            ModuleSpec("MQ-2 sensor", 160, 4.435e-2, 1)

    def test_negative_on_time_is_rejected(self):
        with pytest.raises(ValidationError):
            ModuleSpec("DHT11 sensor", 0.3, 8.33e-5, -1)


class TestCycle:

    def test_regular_cycle_charge(self, regular):
        assert cycle_energy(regular, DutyCycle(2, 0)) == pytest.approx(0.060405312, rel=1e-9)

    def test_regular_cycle_energy(self, regular):
        assert cycle_power(cycle_energy(regular, DutyCycle(2, 0)), 9) == pytest.approx(0.5436478, rel=1e-6)

    def test_sleep_modules_charge_the_whole_sleep(self, regular):
        extra = cycle_energy(regular, DutyCycle(2, 3)) - cycle_energy(regular, DutyCycle(2, 0))
        assert extra == pytest.approx(3 * 5.56e-8)

    def test_emergency_cycle_energy(self, emergency):
        energy = cycle_power(cycle_energy(emergency, DutyCycle(1, 0, Mode.EMERGENCY)), 9)
        assert energy == pytest.approx(0.58463, rel=1e-5)

    def test_negative_voltage_is_rejected(self):
        with pytest.raises(ValidationError):
            cycle_power(1.0, -9)

    def test_zero_active_time_is_rejected(self):
        with pytest.raises(ValidationError):
            DutyCycle(0, 3)


class TestConsumption:

    @pytest.mark.parametrize("sleep_s, year_kwh", [(0, 8.45), (1, 5.64), (2, 4.23), (3, 3.38)])
    def test_device_year(self, regular, sleep_s, year_kwh):
        assert consumption_over(regular, DutyCycle(2, sleep_s), Period.YEAR) == pytest.approx(year_kwh, rel=5e-3)

    def test_device_day_at_three_seconds(self, regular):
        assert consumption_over(regular, DutyCycle(2, 3), "day") == pytest.approx(9.4e-3, rel=5e-3)

    @pytest.mark.parametrize("sleep_s, year_kwh", [(0, 2536.22), (3, 1014.50)])
    def test_fleet_year(self, regular, sleep_s, year_kwh):
        assert consumption_over(regular, DutyCycle(2, sleep_s), "year", 300) == pytest.approx(year_kwh, rel=5e-3)

    def test_empty_fleet_consumes_nothing(self, regular):
        assert consumption_over(regular, DutyCycle(2, 3), "year", 0) == 0

    def test_unknown_period(self, regular):
        with pytest.raises(InvalidPeriod):
            consumption_over(regular, DutyCycle(2, 3), "fortnight")

    def test_calendar_is_configurable(self, regular):
        duty = DutyCycle(2, 3)
        longer = consumption_over(regular, duty, "year", calendar=Calendar(31, 12))
        assert longer == pytest.approx(consumption_over(regular, duty, "year") * 31 / 30)

    def test_rate_matches_energy_model(self, regular):
        model = EnergyModel(regular, DutyCycle(2, 1))
        assert model.rate_mwh_per_s == pytest.approx(consumption_rate(regular, DutyCycle(2, 1)))
        assert model.consumption_over("day") == pytest.approx(model.energy_over_mwh(86400) / 1e6)


class TestSavings:

    @pytest.mark.parametrize("sleep_s, savings", [(1, 33.33), (2, 49.99), (3, 59.99)])
    def test_savings_against_no_sleep(self, regular, sleep_s, savings):
        assert savings_vs_baseline(DutyCycle(2, sleep_s), DutyCycle(2, 0), regular) == pytest.approx(savings, abs=0.02)

    def test_zero_baseline_is_rejected(self):
        idle = DeviceProfile("idle", (ModuleSpec("led", 0, 0, 1),), 9)
        with pytest.raises(ValidationError):
            savings_vs_baseline(DutyCycle(2, 3), DutyCycle(2, 0), idle)

    @given(st.floats(0, 3), st.floats(0, 3))
    def test_savings_grow_with_sleep(self, a, b):
        profile = DeviceProfile("p", (ModuleSpec.from_current("radio", 28, 2),),
                                9, (ModuleSpec.from_current("sleep", 1e-4),))
        low, high = sorted((a, b))
        base = DutyCycle(2, 0)
        assert (savings_vs_baseline(DutyCycle(2, high), base, profile)
                >= savings_vs_baseline(DutyCycle(2, low), base, profile) - 1e-9)

    @pytest.mark.parametrize("fraction, savings", [(0.01, 58.25), (0.02, 56.49), (0.05, 51.24), (0.10, 42.48)])
    def test_emergency_share(self, regular, emergency, fraction, savings):
        result = mixed_mode_savings(DutyCycle(2, 3), fraction, regular_profile=regular,
                                    emergency_profile=emergency)
        assert result == pytest.approx(savings, abs=0.1)

    def test_emergency_share_outside_unit_interval(self, regular, emergency):
        with pytest.raises(ValidationError):
            mixed_mode_savings(DutyCycle(2, 3), 1.5, regular_profile=regular, emergency_profile=emergency)

    def test_mixed_fleet_row(self, regular, emergency):
        mix = mixed_consumption(DutyCycle(2, 3), 0.01, regular_profile=regular, emergency_profile=emergency,
                                fleet_size=300)
        assert mix.energy_per_cycle_mwh == pytest.approx(163.21, rel=5e-3)
        assert mix.kwh_per[Period.YEAR] == pytest.approx(1058.95, rel=5e-3)


class TestSweep:

    def test_rows_per_sleep_value(self, regular):
        reports = sweep(regular, [0, 1, 2, 3], 2)
        assert list(reports) == [0, 1, 2, 3]
        assert reports[0].savings_pct == 0.0
        assert reports[3].savings_pct == pytest.approx(59.99, abs=0.02)
        assert reports[3].baseline == "T=0"

    def test_regulatory_limit(self, regular):
        with pytest.raises(RegulatoryViolation):
            sweep(regular, [4], 2)

    def test_limit_can_be_disabled(self, regular):
        assert 4 in sweep(regular, [4], 2, regulatory_limit_s=None)

    def test_report_against_itself_saves_nothing(self, regular):
        duty = DutyCycle(2, 3)
        assert consumption_report(regular, duty, baseline=duty).savings_pct == 0.0

    def test_report_without_baseline_has_no_savings(self, regular):
        assert consumption_report(regular, DutyCycle(2, 3)).savings_pct is None


_RADIO = ModuleSpec.from_current("radio", 28)
_SENSOR = ModuleSpec.from_current("sensor", 160)


class TestProperties:

    def test_no_modules_draw_nothing(self):
        empty = DeviceProfile("empty", (), 9)
        assert cycle_energy(empty, DutyCycle(2, 3)) == 0
        assert consumption_over(empty, DutyCycle(2, 3), "year", 300) == 0

    @given(st.floats(0, 10), st.floats(0, 10), st.floats(0.1, 10))
    def test_charge_is_linear_in_on_times(self, radio_s, sensor_s, k):
        def charge(scale):
            modules = (_RADIO.with_response_time(scale * radio_s), _SENSOR.with_response_time(scale * sensor_s))
            return cycle_energy(DeviceProfile("p", modules, 9), DutyCycle(2, 0))
        assert charge(k) == pytest.approx(k * charge(1), rel=1e-9, abs=1e-15)

    @settings(suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.integers(0, 1000), st.floats(0, 3))
    def test_fleet_is_devices_times_one(self, regular, n, sleep_s):
        duty = DutyCycle(2, sleep_s)
        assert consumption_over(regular, duty, "year", n) == pytest.approx(n * consumption_over(regular, duty, "year"))

    @settings(suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.floats(0, 3))
    def test_hour_is_sixty_minutes(self, regular, sleep_s):
        duty = DutyCycle(2, sleep_s)
        assert consumption_over(regular, duty, Period.HOUR) == pytest.approx(60 * consumption_over(regular, duty, Period.MINUTE))

    @settings(suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.floats(0, 1), st.floats(0, 1))
    def test_more_emergency_saves_less(self, regular, emergency, a, b):
        low, high = sorted((a, b))
        def savings(fraction):
            return mixed_mode_savings(DutyCycle(2, 3), fraction, regular_profile=regular,
                                      emergency_profile=emergency)
        assert savings(high) <= savings(low) + 1e-9
