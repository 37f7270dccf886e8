import pytest

from fogduty.energy import DutyCycle, EnergyModel, Mode
from fogduty.errors import ConfigMismatch, EmptySample, ValidationError
from fogduty.protocol import DeviceMode
from fogduty.queueing import QueueModel, system_time
from fogduty.schedule import DaySchedule, OccupancyGroup
from fogduty.sim import (ArrivalModel, EmergencyScenario, ServiceModel, Simulation, compare_with_analytic,
                         merge_reports, run)
from fogduty.sim.config import DEFAULT_HORIZON_S


@pytest.fixture
def sim_config(reference):
    def build(**overrides):
        return reference.sim_config(**overrides)
    return build


def _energy_model(config):
    return EnergyModel(config.regular_profile, DutyCycle(config.active_s, config.sleep_s))


class TestConfig:

    @pytest.mark.parametrize("overrides", [
        {"sleep_s": 4.0}, {"sleep_s": 3.01}, {"horizon_s": 0.0}, {"feedback_fraction": 1.0}, {"fleet_size": -1},
        {"horizon_s": 100.0, "emergency": EmergencyScenario(200.0, 10.0)},
        {"fleet_size": 3, "emergency": EmergencyScenario(10.0, 5.0, (5, 7))}])
    def test_rejected(self, sim_config, overrides):
        with pytest.raises(ValidationError):
            sim_config(**overrides)

    def test_affected_devices(self):
        assert EmergencyScenario(0.0, 1.0, "all").devices(3) == (0, 1, 2)
        assert EmergencyScenario(0.0, 1.0, (1, 5)).devices(3) == (1,)
        with pytest.raises(ValidationError):
            EmergencyScenario(0.0, 1.0, "some")
        with pytest.raises(ValidationError):
            EmergencyScenario(0.0, 1.0, ())


class TestRun:

    def test_same_seed_same_report(self, sim_config):
        config = sim_config(fleet_size=20, horizon_s=500.0, seed=7, feedback_fraction=0.05)
        assert run(config).to_dict() == run(config).to_dict()

    def test_seed_changes_the_run(self, sim_config):
        config = sim_config(fleet_size=20, horizon_s=500.0)
        assert run(config.with_seed(1)).mean_sojourn_s != run(config.with_seed(2)).mean_sojourn_s

    def test_empty_fleet(self, sim_config):
        report = run(sim_config(fleet_size=0, horizon_s=100.0))
        assert report.served["device"] == 0
        assert report.energy_mwh == 0
        assert report.savings_pct is None
        with pytest.raises(EmptySample):
            compare_with_analytic(report, QueueModel(0.0, 576.0), _energy_model(sim_config(fleet_size=0)))

    def test_packets_are_conserved(self, sim_config):
        report = run(sim_config(fleet_size=50, horizon_s=300.0, feedback_fraction=0.05))
        assert report.conserved()
        assert report.sent["control"] > 0
        assert report.littles_residual < 0.05

    def test_deterministic_day_energy(self, sim_config):
        config = sim_config(fleet_size=10, sleep_s=3.0, horizon_s=86400.0,
                            arrival_model=ArrivalModel.DETERMINISTIC_CYCLE,
                            service_model=ServiceModel.DETERMINISTIC)
        report = run(config)
        expected = _energy_model(config).energy_over_mwh(86400.0, 10)
        assert report.energy_mwh == pytest.approx(expected, rel=5e-3)
        assert report.kwh_per["day"] == pytest.approx(10 * 9.4e-3, rel=5e-3)
        assert report.arrival_rate_pps == pytest.approx(2.0, rel=1e-2)

    def test_emergency_for_the_whole_run(self, sim_config, emergency):
        config = sim_config(fleet_size=10, sleep_s=3.0, horizon_s=500.0,
                            emergency=EmergencyScenario(0.0, 1000.0, "all"))
        report = run(config)
        expected = EnergyModel(emergency, DutyCycle(1.0, 0.0, Mode.EMERGENCY)).energy_per_cycle_mwh
        assert report.energy_per_cycle_mwh == pytest.approx(expected, rel=1e-6)
        assert report.energy_per_cycle_mwh == pytest.approx(0.585, abs=1e-3)

    def test_one_percent_emergency(self, sim_config):
        config = sim_config(fleet_size=30, sleep_s=3.0, horizon_s=10_000.0,
                            emergency=EmergencyScenario(5000.0, 100.0, "all"))
        report = run(config)
        assert report.savings_pct == pytest.approx(58.25, abs=0.5)

    def test_emergency_end_returns_to_regular(self, sim_config):
        config = sim_config(fleet_size=10, sleep_s=3.0, horizon_s=400.0,
                            arrival_model=ArrivalModel.DETERMINISTIC_CYCLE,
                            emergency=EmergencyScenario(100.0, 50.0, (0,)))
        simulation = Simulation(config)
        report = simulation.run()
        assert {device.state.mode for device in simulation.devices} == {DeviceMode.REGULAR}
        assert report.event_counts["emergency_start"] == 1
        assert report.event_counts["emergency_end"] == 1
        assert 0.0 <= report.max_delivery_wait_s <= config.active_s + config.sleep_s + 1e-9

    def test_emergency_end_keeps_away_groups_asleep(self, sim_config):
        group = OccupancyGroup("all", 10, (DaySchedule.parse("00:00", "23:59"),))
        config = sim_config(fleet_size=10, sleep_s=3.0, horizon_s=400.0, groups=(group,),
                            arrival_model=ArrivalModel.DETERMINISTIC_CYCLE,
                            emergency=EmergencyScenario(100.0, 50.0, (0,)))
        simulation = Simulation(config)
        simulation.run()
        assert {device.state.mode for device in simulation.devices} == {DeviceMode.AWAY}
        assert {device.duty.sleep_s for device in simulation.devices} == {4.0}

    def test_occupancy_waits_for_the_emergency_to_end(self, sim_config):
        group = OccupancyGroup("all", 10, (DaySchedule.parse("00:00", "00:10"),))
        scenario = EmergencyScenario(500.0, 300.0, (0,))
        during = Simulation(sim_config(fleet_size=10, sleep_s=3.0, horizon_s=790.0, groups=(group,),
                                       arrival_model=ArrivalModel.DETERMINISTIC_CYCLE, emergency=scenario))
        report = during.run()
        assert report.event_counts["away_end"] == 1
        assert during.devices[0].state.mode is DeviceMode.EMERGENCY
        assert during.devices[0].duty.mode is Mode.EMERGENCY
        assert {device.state.mode for device in during.devices} == {DeviceMode.EMERGENCY}
        after = Simulation(during.config.replace(horizon_s=1000.0))
        after.run()
        assert {device.state.mode for device in after.devices} == {DeviceMode.REGULAR}

    def test_regular_sleep_stays_within_the_limit(self, sim_config):
        group = OccupancyGroup("half", 10, (DaySchedule.parse("00:00", "00:20"),))
        simulation = Simulation(sim_config(fleet_size=20, sleep_s=3.0, horizon_s=2000.0, groups=(group,),
                                           feedback_fraction=0.1,
                                           arrival_model=ArrivalModel.DETERMINISTIC_CYCLE))
        simulation.run()
        for device in simulation.devices:
            assert device.state.regular_sleep_s <= 3.0
            if device.state.mode is DeviceMode.REGULAR:
                assert device.duty.sleep_s <= 3.0


class TestAnalyticComparison:

    def test_config_mismatch(self, sim_config):
        config = sim_config(fleet_size=20, horizon_s=200.0)
        report = run(config)
        with pytest.raises(ConfigMismatch):
            compare_with_analytic(report, QueueModel(report.configured_arrival_rate_pps, 500.0),
                                  _energy_model(config))

    def test_deterministic_runs_report_only(self, sim_config):
        config = sim_config(fleet_size=50, horizon_s=500.0, arrival_model=ArrivalModel.DETERMINISTIC_CYCLE)
        summary = compare_with_analytic(run(config), config.queue_model(), _energy_model(config))
        assert not summary["occupancy"].enforced
        assert summary["energy"].enforced
        assert summary.note

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(5))
    def test_poisson_matches_mm1(self, sim_config, seed):
        config = sim_config(seed=seed, horizon_s=DEFAULT_HORIZON_S)
        report = run(config)
        assert report.horizon_s == 10_000.0
        assert report.mean_in_system == pytest.approx(system_time(150, 576), rel=0.10)
        assert report.littles_residual < 0.05
        summary = compare_with_analytic(report, config.queue_model(), _energy_model(config))
        assert summary.passed

    @pytest.mark.slow
    def test_replications_pool(self, sim_config):
        config = sim_config(horizon_s=2000.0)
        report = merge_reports([run(config.with_seed(seed)) for seed in range(5)])
        assert report.seeds == (0, 1, 2, 3, 4)
        assert report.horizon_s == 10_000.0
        assert report.mean_in_system == pytest.approx(0.352, rel=0.10)


def test_merge_rejects_different_runs(sim_config):
    first = run(sim_config(fleet_size=5, horizon_s=100.0))
    second = run(sim_config(fleet_size=5, horizon_s=100.0, feedback_fraction=0.1))
    with pytest.raises(ValidationError):
        merge_reports([first, second])
    with pytest.raises(ValidationError):
        merge_reports([])
