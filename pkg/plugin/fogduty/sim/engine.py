"""Discrete-event simulation of a device fleet reporting through one coordinator.

Devices repeat an active period followed by a sleep period and send one report at
the end of each active period. The coordinator serves reports and control packets
from a single FIFO at the service rate of its serial link. Controls reach a device
during the listening part of an active period, or at its next wake, and change the
duty cycle from the following cycle boundary.

Device energy is charged per started cycle with the same per-cycle figure the
energy module computes, so a device's total is an exact sum of cycle energies.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Generator, List, NamedTuple, Optional, Tuple

import numpy as np
import simpy

from ..energy import DeviceProfile, DutyCycle, EnergyModel, Mode
from ..protocol.device import DeviceMode, DeviceState, apply_control, canonical_duty
from ..protocol.frames import ControlMessage, ModeValue
from ..schedule import MINUTES_PER_DAY, away_intervals
from ..shared import logger
from .config import ArrivalModel, EmergencyScenario, ServiceModel, SimConfig
from .report import CONTROL, DEVICE, SimReport

SECONDS_PER_DAY = MINUTES_PER_DAY * 60.0
_EPS = 1e-9
_BATCH = 4096

_Steps = Generator[simpy.Event, Any, None]


class _Stream:
    """Batched draws from one numpy generator."""

    def __init__(self, rng: np.random.Generator) -> None:
        self._rng = rng
        self._exp: List[float] = []
        self._uni: List[float] = []

    def exponential(self, rate: float) -> float:
        if not self._exp:
            self._exp = self._rng.standard_exponential(_BATCH).tolist()
        return self._exp.pop() / rate

    def uniform(self) -> float:
        if not self._uni:
            self._uni = self._rng.random(_BATCH).tolist()
        return self._uni.pop()


class _Packet(NamedTuple):
    arrived: float
    kind: str
    device: int
    control: Optional[ControlMessage] = None
    emergency: bool = False


@dataclass
class _Device:
    index: int
    state: DeviceState
    duty: DutyCycle
    profile: DeviceProfile
    cycle_mwh: float
    anchor: float
    listen_s: float
    group: Optional[int] = None
    prev_listen_end: float = -math.inf
    next_transmit: float = math.inf
    clock: Optional[simpy.Process] = None
    rate_cycle_s: float = 0.0
    energy_mwh: float = 0.0
    cycles: int = 0

    def boundary_after(self, t: float) -> float:
        """First cycle boundary strictly after `t`, or the pending anchor."""
        if t < self.anchor:
            return self.anchor
        cycle = self.duty.cycle_s
        return self.anchor + (math.floor((t - self.anchor) / cycle + _EPS) + 1) * cycle

    def delivery_time(self, t: float) -> float:
        if t < self.anchor:
            return t if t <= self.prev_listen_end else self.anchor
        cycle = self.duty.cycle_s
        start = self.anchor + math.floor((t - self.anchor) / cycle + _EPS) * cycle
        if t <= start + self.listen_s:
            return t
        return start + cycle

    def close(self, until: float) -> None:
        """Charge the cycles started in [anchor, until)."""
        if until <= self.anchor:
            return
        count = math.ceil((until - self.anchor) / self.duty.cycle_s - _EPS)
        self.energy_mwh += count * self.cycle_mwh
        self.cycles += count


@dataclass
class _Counters:
    sent: Counter = field(default_factory=Counter)
    served: Counter = field(default_factory=Counter)
    in_system: int = 0
    area: float = 0.0
    last_t: float = 0.0
    sojourn_sum: float = 0.0
    max_delivery_wait: float = 0.0

    def advance(self, t: float) -> None:
        self.area += self.in_system * (t - self.last_t)
        self.last_t = t


class Simulation:
    """One replication on a simpy environment.

    The coordinator is a process draining a `simpy.Store`; each device clock, the
    aggregate Poisson source, the feedback source, the emergency and every
    occupancy group are processes of their own.
    """

    def __init__(self, config: SimConfig) -> None:
        self._logger = logger(self)
        self.config = config
        self.env = simpy.Environment()
        self._fifo = simpy.Store(self.env)
        self._stream = _Stream(np.random.default_rng(config.seed))
        self._counters = _Counters()
        self._events: Counter = Counter()
        self._energy_cache: Dict[Tuple[str, DutyCycle], float] = {}
        self._queue_model = config.queue_model()
        self._service_rate = self._queue_model.service_rate_pps
        self._rate_sum = 0.0
        self._arrivals: Optional[simpy.Process] = None
        self._emergency_active = False
        self._broadcast_sent = False
        self._affected: frozenset = frozenset()
        self._group_members: List[range] = []
        self._group_away: List[bool] = []
        self._alarm = (ControlMessage.alarm(False), ControlMessage.alarm(True))
        self.devices: List[_Device] = []

    @property
    def now(self) -> float:
        return self.env.now

    def _cycle_mwh(self, profile: DeviceProfile, duty: DutyCycle) -> float:
        key = (profile.name, duty)
        if key not in self._energy_cache:
            self._energy_cache[key] = EnergyModel(profile, duty).energy_per_cycle_mwh
        return self._energy_cache[key]

    def _profile_for(self, state: DeviceState) -> DeviceProfile:
        if state.mode is DeviceMode.EMERGENCY:
            return self.config.emergency_profile
        return self.config.regular_profile

    def _duty_for(self, state: DeviceState) -> DutyCycle:
        return canonical_duty(state, self.config.active_s, self.config.emergency_active_s)

    @property
    def _deterministic(self) -> bool:
        return self.config.arrival_model is ArrivalModel.DETERMINISTIC_CYCLE

    def _after(self, delay: float, label: str, action: Callable[..., None], *args: Any) -> _Steps:
        yield self.env.timeout(max(delay, 0.0))
        self._events[label] += 1
        action(*args)

    def _later(self, at: float, label: str, action: Callable[..., None], *args: Any) -> None:
        self.env.process(self._after(at - self.now, label, action, *args))

    # setup

    def _place_devices(self) -> None:
        cfg = self.config
        offset = 0
        owner: Dict[int, int] = {}
        for g, group in enumerate(cfg.groups):
            self._group_members.append(range(offset, offset + group.apartment_count))
            self._group_away.append(False)
            for i in self._group_members[-1]:
                owner[i] = g
            offset += group.apartment_count
        for i in range(cfg.fleet_size):
            state = DeviceState.regular(cfg.sleep_s, cfg.long_sleep_s)
            duty = self._duty_for(state)
            profile = self._profile_for(state)
            phase = self._stream.uniform() * duty.cycle_s
            device = _Device(i, state, duty, profile, self._cycle_mwh(profile, duty), phase,
                             duty.active_s - cfg.transmit_s, owner.get(i),
                             rate_cycle_s=duty.cycle_s)
            self.devices.append(device)
            if self._deterministic:
                device.next_transmit = phase + duty.active_s - cfg.transmit_s
                device.clock = self.env.process(self._device_clock(device))
            else:
                self._rate_sum += 1.0 / duty.cycle_s
        if not self._deterministic and self._rate_sum > 0:
            self._arrivals = self.env.process(self._poisson_source())

    def _start_sources(self) -> None:
        cfg = self.config
        self.env.process(self._coordinator())
        if self._queue_model.feedback_rate_pps > 0 and cfg.fleet_size > 0:
            self.env.process(self._feedback_source(self._queue_model.feedback_rate_pps))
        if cfg.emergency is not None:
            self._affected = frozenset(cfg.emergency.devices(cfg.fleet_size))
            self.env.process(self._emergency(cfg.emergency))
        for g, group in enumerate(cfg.groups):
            if group.apartment_count and group.schedules:
                self.env.process(self._occupancy(g, self._away_windows(group.schedules)))

    def _away_windows(self, schedules) -> List[Tuple[float, float]]:
        """Away intervals of every simulated day, joined across midnight."""
        daily = away_intervals(schedules)
        days = int(math.ceil(self.config.horizon_s / SECONDS_PER_DAY)) + 1
        merged: List[List[float]] = []
        for day in range(days):
            for start, end in daily:
                a = day * SECONDS_PER_DAY + start * 60.0
                b = day * SECONDS_PER_DAY + end * 60.0
                if merged and a <= merged[-1][1] + _EPS:
                    merged[-1][1] = max(merged[-1][1], b)
                else:
                    merged.append([a, b])
        return [(a, b) for a, b in merged if a < self.config.horizon_s]

    # coordinator

    def _enqueue(self, kind: str, device: int, control: Optional[ControlMessage] = None,
                 emergency: bool = False) -> None:
        t = self.now
        self._counters.sent[kind] += 1
        if kind == DEVICE:
            self._counters.advance(t)
            self._counters.in_system += 1
        self._fifo.put(_Packet(t, kind, device, control, emergency))

    def _service_time(self) -> float:
        if self.config.service_model is ServiceModel.EXPONENTIAL:
            return self._stream.exponential(self._service_rate)
        return 1.0 / self._service_rate

    def _coordinator(self) -> _Steps:
        while True:
            packet = yield self._fifo.get()
            yield self.env.timeout(self._service_time())
            self._events["departure"] += 1
            self._depart(packet)

    def _depart(self, packet: _Packet) -> None:
        t = self.now
        self._counters.served[packet.kind] += 1
        if packet.kind == DEVICE:
            self._counters.advance(t)
            self._counters.in_system -= 1
            self._counters.sojourn_sum += t - packet.arrived
            if packet.emergency and self._emergency_active and not self._broadcast_sent:
                self._broadcast_sent = True
                self._broadcast(ControlMessage.mode(ModeValue.EMERGENCY), skip=packet.device)
        else:
            when = self.devices[packet.device].delivery_time(t)
            self._counters.max_delivery_wait = max(self._counters.max_delivery_wait, when - t)
            self._later(when, "deliver", self._deliver, packet.device, packet.control)

    def _broadcast(self, control: ControlMessage, skip: Optional[int] = None) -> None:
        for device in self.devices:
            if device.index != skip:
                self._enqueue(CONTROL, device.index, control)

    # devices

    def _poisson_source(self) -> _Steps:
        """Superposed report stream of the fleet at the current sum of device rates."""
        while True:
            try:
                if self._rate_sum > _EPS:
                    yield self.env.timeout(self._stream.exponential(self._rate_sum))
                    self._events["arrival"] += 1
                    self._enqueue(DEVICE, -1)
                else:
                    yield self.env.event()
            except simpy.Interrupt:
                pass

    def _device_clock(self, device: _Device) -> _Steps:
        while True:
            try:
                yield self.env.timeout(max(device.next_transmit - self.now, 0.0))
            except simpy.Interrupt:
                continue
            self._events["transmit"] += 1
            self._transmit(device)

    def _transmit(self, device: _Device) -> None:
        t = self.now
        emergency = (device.index in self._affected and self._emergency_active
                     and device.duty.mode is Mode.EMERGENCY and t >= device.anchor)
        self._enqueue(DEVICE, device.index, emergency=emergency)
        if t < device.anchor:
            start = device.anchor
        else:
            cycle = device.duty.cycle_s
            start = device.anchor + (math.floor((t - device.anchor) / cycle + _EPS) + 1) * cycle
        device.next_transmit = start + device.duty.active_s - self.config.transmit_s

    def _switch(self, device: _Device, state: DeviceState, report: bool = False) -> None:
        """Apply a new device state from the next cycle boundary."""
        t = self.now
        device.state = state
        duty = self._duty_for(state)
        profile = self._profile_for(state)
        if duty == device.duty and profile is device.profile:
            return
        boundary = device.boundary_after(t)
        if boundary > device.anchor:
            device.close(boundary)
            device.prev_listen_end = boundary - device.duty.cycle_s + device.listen_s
        device.anchor = boundary
        device.duty = duty
        device.profile = profile
        device.cycle_mwh = self._cycle_mwh(profile, duty)
        device.listen_s = duty.active_s - self.config.transmit_s
        report_at = boundary + device.listen_s
        if self._deterministic:
            if device.next_transmit >= boundary - _EPS:
                device.next_transmit = report_at
                device.clock.interrupt()
        else:
            self._later(boundary, "rate", self._rate_change, device, duty.cycle_s)
            if report:
                self._later(report_at, "inject", self._enqueue, DEVICE, device.index, None, True)

    def _deliver(self, index: int, control: ControlMessage) -> None:
        device = self.devices[index]
        self._switch(device, apply_control(device.state, control))

    def _rate_change(self, device: _Device, cycle_s: float) -> None:
        self._rate_sum += 1.0 / cycle_s - 1.0 / device.rate_cycle_s
        device.rate_cycle_s = cycle_s
        self._arrivals.interrupt()

    # scenarios

    def _feedback_source(self, rate: float) -> _Steps:
        while True:
            yield self.env.timeout(self._stream.exponential(rate))
            self._events["feedback"] += 1
            target = min(int(self._stream.uniform() * len(self.devices)), len(self.devices) - 1)
            self._enqueue(CONTROL, target, self._alarm[self.devices[target].state.alarm_on])

    def _emergency(self, scenario: EmergencyScenario) -> _Steps:
        yield self.env.timeout(scenario.start_s)
        self._events["emergency_start"] += 1
        self.trigger_emergency()
        yield self.env.timeout(scenario.duration_s)
        self._events["emergency_end"] += 1
        self._end_emergency()

    def trigger_emergency(self) -> None:
        """Affected devices enter Emergency mode; their first served report starts the broadcast."""
        self._emergency_active = True
        self._broadcast_sent = False
        self._logger.info("emergency at %.3f s on %d device(s)", self.now, len(self._affected))
        for index in sorted(self._affected):
            device = self.devices[index]
            state = apply_control(device.state, ControlMessage.mode(ModeValue.EMERGENCY))
            self._switch(device, state, report=True)

    def _end_emergency(self) -> None:
        self._emergency_active = False
        regular = ControlMessage.mode(ModeValue.REGULAR)
        away = ControlMessage.mode(ModeValue.AWAY)
        for device in self.devices:
            is_away = device.group is not None and self._group_away[device.group]
            self._enqueue(CONTROL, device.index, away if is_away else regular)

    def _occupancy(self, group: int, windows: List[Tuple[float, float]]) -> _Steps:
        for start, end in windows:
            yield self.env.timeout(max(start - self.now, 0.0))
            self._events["away_start"] += 1
            self._away(group, True)
            yield self.env.timeout(max(end - self.now, 0.0))
            self._events["away_end"] += 1
            self._away(group, False)

    def _away(self, group: int, leaving: bool) -> None:
        self._group_away[group] = leaving
        if self._emergency_active:
            # the end of the emergency sends Away or Regular from _group_away
            self._logger.debug("group %d %s during the emergency", group, "leaves" if leaving else "returns")
            return
        if leaving:
            control = ControlMessage.long_sleep(int(round(self.config.long_sleep_s)))
        else:
            control = ControlMessage.mode(ModeValue.REGULAR)
        for index in self._group_members[group]:
            self._enqueue(CONTROL, index, control)

    # run

    def run(self) -> SimReport:
        cfg = self.config
        self._logger.info("simulating %d device(s) for %.0f s (seed %d, %s arrivals, %s service)",
                          cfg.fleet_size, cfg.horizon_s, cfg.seed, cfg.arrival_model.value,
                          cfg.service_model.value)
        saturated = not self._queue_model.is_stable
        if saturated and cfg.fleet_size:
            self._logger.warning("coordinator saturated: lambda %.2f >= mu_eff %.2f",
                                 self._queue_model.arrival_rate_pps,
                                 self._queue_model.effective_service_rate_pps)
        self._place_devices()
        self._start_sources()
        horizon = cfg.horizon_s
        self.env.run(until=horizon)
        self._counters.advance(horizon)
        for device in self.devices:
            device.close(horizon)
        report = self._report(saturated)
        self._logger.info("done: %d events, %d report(s) served, %.4g mWh",
                          sum(self._events.values()), report.served[DEVICE], report.energy_mwh)
        return report

    def _report(self, saturated: bool) -> SimReport:
        cfg = self.config
        counters = self._counters
        sent = {kind: counters.sent[kind] for kind in (DEVICE, CONTROL)}
        served = {kind: counters.served[kind] for kind in (DEVICE, CONTROL)}
        in_queue = {kind: sent[kind] - served[kind] for kind in (DEVICE, CONTROL)}
        mean_in_system = counters.area / cfg.horizon_s
        mean_sojourn = counters.sojourn_sum / served[DEVICE] if served[DEVICE] else 0.0
        observed_rate = sent[DEVICE] / cfg.horizon_s
        residual = 0.0
        if mean_in_system > 0:
            residual = abs(mean_in_system - observed_rate * mean_sojourn) / mean_in_system
        energies = tuple(device.energy_mwh for device in self.devices)
        cycles = tuple(device.cycles for device in self.devices)
        total = math.fsum(energies)
        baseline = EnergyModel(cfg.regular_profile, DutyCycle(cfg.active_s, 0.0))
        baseline_mwh = baseline.energy_over_mwh(cfg.horizon_s, cfg.fleet_size)
        return SimReport(
            seed=cfg.seed,
            seeds=(cfg.seed,),
            horizon_s=cfg.horizon_s,
            fleet_size=cfg.fleet_size,
            arrival_model=cfg.arrival_model.value,
            service_model=cfg.service_model.value,
            cycle_s=cfg.cycle_s,
            configured_arrival_rate_pps=self._queue_model.arrival_rate_pps,
            service_rate_pps=self._service_rate,
            feedback_fraction=cfg.feedback_fraction,
            sent=sent,
            served=served,
            in_queue=in_queue,
            saturated=saturated,
            mean_in_system=mean_in_system,
            mean_sojourn_s=mean_sojourn,
            arrival_rate_pps=observed_rate,
            littles_residual=residual,
            device_energy_mwh=energies,
            device_cycles=cycles,
            energy_mwh=total,
            savings_pct=100.0 * (1.0 - total / baseline_mwh) if baseline_mwh > 0 else None,
            kwh_per=SimReport.scale_kwh(total, cfg.horizon_s),
            event_counts=dict(sorted(self._events.items())),
            max_delivery_wait_s=counters.max_delivery_wait,
        )


def run(config: SimConfig) -> SimReport:
    """Run one simulation; the same config and seed give an identical report."""
    return Simulation(config).run()


__all__ = ["Simulation", "run"]
