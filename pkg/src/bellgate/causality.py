"""Timing analysis of a hypothesized detector-to-source influence.

Suppose something leaves the slit the moment a gate window opens,
travels back down the fiber at speed v (possibly instantaneous), and
makes the source emit "informed" pairs for as long as the line of sight
stays open.  Those pairs still have to cover the fiber to reach the
slit.  :func:`influence_window_analysis` computes the informed photons'
arrival interval and how much of it overlaps *any* periodic gate
window; a pass fraction of zero means no photon carrying information
about the open gate can ever be detected through it.

With the reference bench the fiber transit alone (667 ns) outlasts the
467 ns window, so every speed from c upward -- including instantaneous
-- gives a zero pass fraction.  The loophole the closed form exposes is
a discrete family of much slower speeds whose round trip lands exactly
on a *later* window; :func:`resonant_influence_speeds` enumerates those
intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .apparatus import GateGeometry
from .sources import INSTANTANEOUS

__all__ = [
    "CausalityReport",
    "SpeedInterval",
    "INSTANTANEOUS",
    "influence_window_analysis",
    "resonant_influence_speeds",
]


@dataclass(frozen=True)
class CausalityReport:
    """Windows, overlap and margin for one hypothesized influence speed."""

    influence_speed: float                         # m/s; math.inf = instantaneous
    influence_arrival_at_source: float             # s after the gate opens
    informed_emission_window: tuple[float, float]  # s
    informed_arrival_window_at_slit: tuple[float, float]  # s
    earliest_open_overlap: int | None              # gate-window index, or None
    pass_fraction: float                           # fraction of informed arrivals gated through
    isolation_margin: float                        # arrival start minus window-0 close, s


@dataclass(frozen=True)
class SpeedInterval:
    """Influence speeds whose informed arrivals overlap gate window k."""

    window_index: int
    low: float
    high: float     # math.inf when arbitrarily fast influences reach the window
    center: float


def _windowed_overlap(start: float, end: float, period: float, open_time: float):
    """Overlap of [start, end] with the union of [k*period, k*period+open_time),
    k >= 0.  Returns (total overlap, earliest overlapping k or None)."""
    total = 0.0
    earliest = None
    k_lo = max(0, int(math.floor(start / period)) - 1)
    k_hi = int(math.floor(end / period)) + 1
    for k in range(k_lo, k_hi + 1):
        lo = k * period
        overlap = min(end, lo + open_time) - max(start, lo)
        if overlap > 0:
            total += overlap
            if earliest is None:
                earliest = k
    return total, earliest


def influence_window_analysis(
    geometry: GateGeometry,
    fiber_length: float,
    influence_speed: float,
    photon_speed: float,
) -> CausalityReport:
    """Closed-form pass fraction for one influence speed.

    The influence departs the slit when window 0 opens (t = 0), reaches
    the source after fiber_length/influence_speed, and informs emissions
    only while the slit stays in view (one aperture time).  Informed
    photons then need fiber_length/photon_speed to come back.  The pass
    fraction is the part of their arrival interval that lands inside any
    open window.
    """
    if not influence_speed > 0:
        raise ValueError("influence speed must be positive or instantaneous")
    if not photon_speed > 0:
        raise ValueError("photon speed must be positive")
    if fiber_length < 0:
        raise ValueError("fiber length must be non-negative")
    t_on = geometry.aperture_time
    influence_arrival = (
        0.0 if math.isinf(influence_speed) else fiber_length / influence_speed
    )
    emission = (influence_arrival, influence_arrival + t_on)
    photon_transit = fiber_length / photon_speed
    arrival = (emission[0] + photon_transit, emission[1] + photon_transit)
    overlap, earliest = _windowed_overlap(
        arrival[0], arrival[1], geometry.gate_period, t_on
    )
    return CausalityReport(
        influence_speed=influence_speed,
        influence_arrival_at_source=influence_arrival,
        informed_emission_window=emission,
        informed_arrival_window_at_slit=arrival,
        earliest_open_overlap=earliest,
        pass_fraction=overlap / (arrival[1] - arrival[0]),
        isolation_margin=arrival[0] - t_on,
    )


def resonant_influence_speeds(
    geometry: GateGeometry,
    fiber_length: float,
    photon_speed: float,
    max_windows: int,
) -> list[SpeedInterval]:
    """All influence speeds that sneak informed photons through a later window.

    The arrival interval overlaps window k iff the total transit
    fiber_length/v + fiber_length/photon_speed falls within one aperture
    time of k*gate_period (the tolerance is the arrival-interval width
    plus the window width, i.e. 2 aperture times, centred on the period
    multiple).  Solving for v gives one speed interval per reachable k.
    """
    if max_windows < 1:
        raise ValueError("max_windows must be at least 1")
    if fiber_length <= 0:
        return []
    t_on = geometry.aperture_time
    period = geometry.gate_period
    photon_transit = fiber_length / photon_speed
    intervals: list[SpeedInterval] = []
    for k in range(1, max_windows + 1):
        slow_gap = k * period + t_on - photon_transit  # longest useful influence transit
        fast_gap = k * period - t_on - photon_transit  # shortest useful influence transit
        if slow_gap <= 0:
            # Even an instantaneous influence returns after window k closes.
            continue
        low = fiber_length / slow_gap
        high = math.inf if fast_gap <= 0 else fiber_length / fast_gap
        center_gap = k * period - photon_transit
        center = math.inf if center_gap <= 0 else fiber_length / center_gap
        intervals.append(SpeedInterval(window_index=k, low=low, high=high, center=center))
    return intervals
