import math

import numpy as np
import pytest

from bellgate.apparatus import GateGeometry, LIGHT_SPEED_VACUUM
from bellgate.causality import (
    INSTANTANEOUS,
    influence_window_analysis,
    resonant_influence_speeds,
)

FIBER_LENGTH = 200.0
T_ON = 4.681027737996921e-07
GATE_PERIOD = 2.9411764705882354e-05
FIBER_TRANSIT = FIBER_LENGTH / LIGHT_SPEED_VACUUM  # 6.671e-7 s


def test_instantaneous_influence_cannot_pass(bench_geometry):
    report = influence_window_analysis(
        bench_geometry, FIBER_LENGTH, INSTANTANEOUS, LIGHT_SPEED_VACUUM
    )
    assert report.influence_arrival_at_source == 0.0
    assert report.informed_emission_window == pytest.approx((0.0, T_ON), rel=1e-12)
    # informed photons reach the slit only after the full fiber transit,
    # 199 ns after the emitting window has already closed
    assert report.informed_arrival_window_at_slit == pytest.approx(
        (FIBER_TRANSIT, FIBER_TRANSIT + T_ON), rel=1e-12
    )
    assert report.pass_fraction == 0.0
    assert report.earliest_open_overlap is None
    assert report.isolation_margin == pytest.approx(1.9900863380537798e-07, rel=1e-12)
    assert report.isolation_margin == pytest.approx(2.0e-7, rel=0.01)


def test_light_speed_influence_cannot_pass(bench_geometry):
    report = influence_window_analysis(
        bench_geometry, FIBER_LENGTH, LIGHT_SPEED_VACUUM, LIGHT_SPEED_VACUUM
    )
    assert report.informed_arrival_window_at_slit == pytest.approx(
        (2 * FIBER_TRANSIT, 2 * FIBER_TRANSIT + T_ON), rel=1e-12
    )
    assert report.informed_arrival_window_at_slit[0] == pytest.approx(1.33e-6, rel=0.01)
    assert report.pass_fraction == 0.0


def test_no_fiber_means_no_isolation(bench_geometry):
    report = influence_window_analysis(
        bench_geometry, 0.0, INSTANTANEOUS, LIGHT_SPEED_VACUUM
    )
    assert report.pass_fraction == 1.0
    assert report.earliest_open_overlap == 0
    assert report.isolation_margin == pytest.approx(-T_ON, rel=1e-12)


def test_speed_validation(bench_geometry):
    with pytest.raises(ValueError):
        influence_window_analysis(bench_geometry, FIBER_LENGTH, 0.0, LIGHT_SPEED_VACUUM)
    with pytest.raises(ValueError):
        influence_window_analysis(bench_geometry, FIBER_LENGTH, 1e6, 0.0)
    with pytest.raises(ValueError):
        influence_window_analysis(bench_geometry, -1.0, 1e6, LIGHT_SPEED_VACUUM)


def test_first_resonance_location(bench_geometry):
    intervals = resonant_influence_speeds(
        bench_geometry, FIBER_LENGTH, LIGHT_SPEED_VACUUM, max_windows=1
    )
    assert len(intervals) == 1
    first = intervals[0]
    assert first.window_index == 1
    # solve fiber/v + fiber/c = gate_period
    expected_center = FIBER_LENGTH / (GATE_PERIOD - FIBER_TRANSIT)
    assert first.center == pytest.approx(expected_center, rel=1e-12)
    assert first.center == pytest.approx(6.96e6, rel=0.01)
    assert first.low < first.center < first.high


def test_resonances_round_trip_to_positive_pass(bench_geometry):
    intervals = resonant_influence_speeds(
        bench_geometry, FIBER_LENGTH, LIGHT_SPEED_VACUUM, max_windows=40
    )
    assert len(intervals) == 40
    for interval in intervals:
        for speed in (
            interval.center,
            math.sqrt(interval.low * min(interval.high, 1e40)),
        ):
            report = influence_window_analysis(
                bench_geometry, FIBER_LENGTH, speed, LIGHT_SPEED_VACUUM
            )
            assert report.pass_fraction > 0.0
            assert report.earliest_open_overlap == interval.window_index


def test_gaps_between_resonances_stay_isolated(bench_geometry):
    intervals = resonant_influence_speeds(
        bench_geometry, FIBER_LENGTH, LIGHT_SPEED_VACUUM, max_windows=40
    )
    # midpoints (geometric) between adjacent intervals; intervals come out
    # ordered by window index, i.e. decreasing speed
    for upper, lower in zip(intervals[:-1], intervals[1:]):
        gap_speed = math.sqrt(lower.high * upper.low)
        report = influence_window_analysis(
            bench_geometry, FIBER_LENGTH, gap_speed, LIGHT_SPEED_VACUUM
        )
        assert report.pass_fraction == 0.0


def test_unreachable_windows_give_no_resonances(bench_geometry):
    # spin the mirror 1000x faster: the gate period (2.94e-8 s) is shorter
    # than the photon's own fiber transit, so the first several windows
    # close before even an instantaneous influence could be answered
    fast = GateGeometry(
        aperture_time=T_ON / 1000.0,
        duty_cycle=bench_geometry.duty_cycle,
        gate_period=GATE_PERIOD / 1000.0,
        fiber_delay=FIBER_TRANSIT,
        flight_distance_during_gate=bench_geometry.flight_distance_during_gate / 1000.0,
    )
    reachable = FIBER_TRANSIT / (GATE_PERIOD / 1000.0)  # ~22.7 windows needed
    intervals = resonant_influence_speeds(fast, FIBER_LENGTH, LIGHT_SPEED_VACUUM, 10)
    assert intervals == []
    intervals = resonant_influence_speeds(fast, FIBER_LENGTH, LIGHT_SPEED_VACUUM, 30)
    assert intervals and intervals[0].window_index == math.ceil(reachable)


def test_zero_fiber_has_no_resonances(bench_geometry):
    assert resonant_influence_speeds(bench_geometry, 0.0, LIGHT_SPEED_VACUUM, 10) == []


def test_resonant_speeds_scale_with_fiber_length(bench_geometry):
    # while the photon transit stays small next to the gate period,
    # doubling the fiber doubles every resonant speed
    short = resonant_influence_speeds(bench_geometry, 10.0, LIGHT_SPEED_VACUUM, 5)
    long = resonant_influence_speeds(bench_geometry, 20.0, LIGHT_SPEED_VACUUM, 5)
    for a, b in zip(short, long):
        assert b.center == pytest.approx(2 * a.center, rel=0.01)
        assert b.low == pytest.approx(2 * a.low, rel=0.01)


def test_log_sweep_isolated_except_at_resonances(bench_geometry):
    # every sampled speed from 1e3 to 1e12 m/s is isolated unless it falls
    # in an enumerated resonance interval
    speeds = np.logspace(3, 12, 2000)
    max_windows = (
        int(
            math.ceil(
                (FIBER_LENGTH / speeds[0] + FIBER_TRANSIT + T_ON) / GATE_PERIOD
            )
        )
        + 1
    )
    intervals = resonant_influence_speeds(
        bench_geometry, FIBER_LENGTH, LIGHT_SPEED_VACUUM, max_windows
    )
    lows = np.array([iv.low for iv in intervals])
    highs = np.array([iv.high for iv in intervals])
    guard = 1e-9
    for speed in speeds:
        inside = np.any((speed > lows * (1 + guard)) & (speed < highs * (1 - guard)))
        near_edge = np.any(
            (speed > lows * (1 - guard)) & (speed < lows * (1 + guard))
        ) or np.any((speed > highs * (1 - guard)) & (speed < highs * (1 + guard)))
        if near_edge:
            continue
        report = influence_window_analysis(
            bench_geometry, FIBER_LENGTH, float(speed), LIGHT_SPEED_VACUUM
        )
        assert (report.pass_fraction > 0.0) == bool(inside), f"speed {speed}"


def test_isolation_margin_monotonic_in_aperture_time(bench_geometry):
    margins = []
    for t_on in np.linspace(0.2 * T_ON, 3 * T_ON, 7):
        geom = GateGeometry(
            aperture_time=float(t_on),
            duty_cycle=float(t_on) / GATE_PERIOD,
            gate_period=GATE_PERIOD,
            fiber_delay=FIBER_TRANSIT,
            flight_distance_during_gate=LIGHT_SPEED_VACUUM * float(t_on),
        )
        report = influence_window_analysis(
            geom, FIBER_LENGTH, INSTANTANEOUS, LIGHT_SPEED_VACUUM
        )
        margins.append(report.isolation_margin)
    assert all(a > b for a, b in zip(margins, margins[1:]))


def test_isolation_margin_monotonic_in_fiber_length(bench_geometry):
    for speed in (INSTANTANEOUS, LIGHT_SPEED_VACUUM, 1e7):
        margins = [
            influence_window_analysis(
                bench_geometry, length, speed, LIGHT_SPEED_VACUUM
            ).isolation_margin
            for length in (0.0, 50.0, 200.0, 1000.0)
        ]
        assert all(a < b for a, b in zip(margins, margins[1:]))
