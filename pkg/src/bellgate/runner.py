"""End-to-end simulated runs: emission -> polarizers -> fibers -> gate ->
detectors -> coincidence counting -> analysis.

Two run kinds cover the two standard measurements:

* ``"chsh"`` -- one counting run per polarizer setting (the 4x4 grid by
  default), assembled into a :class:`~bellgate.analysis.CountTable16`
  with accidental estimates from the measured singles rates, then the
  CHSH statistic.
* ``"degradation"`` -- polarizer-free luminosity runs (dark only, gate
  off, gate on) and the per-column with/without rotation ratios.

Every sub-run draws from its own generator seeded by a stable hash of
the master seed and the sub-run's identity (the angle pair, or the
degradation label), never by position, so results are independent of
setting order and reproducible cell by cell.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .analysis import (
    ALICE_ANGLES,
    BOB_ANGLES,
    ChshResult,
    CountTable16,
    DegradationResult,
    NumericalError,
    accidental_rate,
    chsh_S,
    dark_subtract,
    degradation_ratio,
)
from .apparatus import ApparatusConfig, gate_geometry, validate_config
from .detection import CountRecord, DetectorConfig, dark_times, match_coincidences, thin_times
from .gating import GateState, gate_open
from .sources import CorrelationModel, TravelingInfluence, joint_outcomes

GRID_SETTINGS = tuple((a, b) for a in ALICE_ANGLES for b in BOB_ANGLES)

DEGRADATION_LABELS = ("dark", "no_rotation", "with_rotation")

RUN_KINDS = ("chsh", "degradation")

# Emission streams are generated in time slices of roughly this many
# events so memory stays bounded at high pair rates.  Fixed (not
# configurable) so a given plan always consumes the same random stream.
_CHUNK_EVENTS = 1 << 22


@dataclass(frozen=True)
class RunPlan:
    """Everything needed to reproduce one simulated experiment."""

    apparatus: ApparatusConfig
    detector: DetectorConfig
    model: CorrelationModel
    pair_rate: float
    integration_time: float  # seconds per setting / per luminosity run
    rotation: bool = True
    settings: tuple[tuple[float, float], ...] = GRID_SETTINGS
    master_seed: int = 0
    gate_phase: float = 0.0
    accidental_convention: str = "double"
    kind: str = "chsh"

    def __post_init__(self):
        if not self.pair_rate > 0:
            raise ValueError("pair rate must be positive")
        if not self.integration_time > 0:
            raise ValueError("integration time must be positive")
        if not self.settings:
            raise ValueError("settings must be non-empty")
        if self.kind not in RUN_KINDS:
            raise ValueError(f"unknown run kind {self.kind!r}")


class Calibration(NamedTuple):
    pair_rate: float
    efficiency_alice: float
    efficiency_bob: float


class SettingCounts(NamedTuple):
    coincidences: int
    singles_alice: int
    singles_bob: int
    duration: float


def calibrate_from_counts(record: CountRecord, dark: CountRecord) -> Calibration:
    """Infer pair rate and efficiencies from one polarizer-free run.

    With corrected rates S_a, S_b, C and independent per-arm losses,
    C/S_b recovers alice's efficiency, C/S_a bob's, and S_a*S_b/C the
    source pair rate.
    """
    corrected = dark_subtract(record, dark)
    s_a, s_b, c = corrected.rates
    if c <= 0:
        raise NumericalError("coincidence rate is zero after dark subtraction")
    return Calibration(
        pair_rate=s_a * s_b / c,
        efficiency_alice=c / s_b,
        efficiency_bob=c / s_a,
    )


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 63-bit stream seed keyed by the master seed and identity parts."""
    text = "|".join([str(int(master_seed))] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _time_slices(duration: float, pair_rate: float):
    span = max(_CHUNK_EVENTS / pair_rate, 1e-9)
    n_slices = max(1, math.ceil(duration / span))
    edges = np.linspace(0.0, duration, n_slices + 1)
    return zip(edges[:-1], edges[1:])


def run_setting(
    plan: RunPlan,
    alice_angle: float,
    bob_angle: float,
    rng,
    rotation: bool | None = None,
    polarized: bool = True,
) -> SettingCounts:
    """One counting run at a fixed polarizer setting.

    ``polarized=False`` removes the polarizers from the path (luminosity
    and calibration runs): every photon pair continues to the gate.
    """
    geometry = gate_geometry(validate_config(plan.apparatus))
    det = plan.detector
    duration = plan.integration_time
    if rotation is None:
        rotation = plan.rotation
    gate = GateState.from_geometry(geometry, plan.gate_phase) if rotation else None

    influence_gate = None
    if polarized and isinstance(plan.model, TravelingInfluence):
        # An emission is "informed" iff the slit was in view one influence
        # transit earlier, i.e. the gate pattern shifted by that delay.
        if gate is not None:
            delay = (
                0.0
                if math.isinf(plan.model.influence_speed)
                else plan.apparatus.fiber_length / plan.model.influence_speed
            )
            influence_gate = GateState(
                gate.gate_period,
                gate.aperture_time,
                (gate.phase_offset + delay) % gate.gate_period,
            )
        # With the mirror stopped the line of sight is permanent: every
        # emission is informed (influence_gate stays None).

    alice_parts = []
    bob_parts = []
    for t0, t1 in _time_slices(duration, plan.pair_rate):
        n = int(rng.poisson(plan.pair_rate * (t1 - t0)))
        times = t0 + np.sort(rng.random(n) * (t1 - t0))
        if polarized:
            hidden = None
            if isinstance(plan.model, TravelingInfluence):
                hidden = (
                    gate_open(times, influence_gate)
                    if influence_gate is not None
                    else np.ones(n, dtype=bool)
                )
            alice_pass, bob_pass = joint_outcomes(
                plan.model, alice_angle, bob_angle, n, rng, hidden
            )
        else:
            alice_pass = bob_pass = np.ones(n, dtype=bool)
        arrivals = times + geometry.fiber_delay
        if gate is not None:
            open_mask = gate_open(arrivals, gate)
            alice_pass = alice_pass & open_mask
            bob_pass = bob_pass & open_mask
        alice_parts.append(thin_times(arrivals[alice_pass], det.efficiency_alice, rng))
        bob_parts.append(thin_times(arrivals[bob_pass], det.efficiency_bob, rng))

    alice = np.concatenate(alice_parts) if alice_parts else np.empty(0)
    bob = np.concatenate(bob_parts) if bob_parts else np.empty(0)
    alice = np.sort(np.concatenate([alice, dark_times(det.dark_rate_alice, duration, rng)]))
    bob = np.sort(np.concatenate([bob, dark_times(det.dark_rate_bob, duration, rng)]))
    coincidences = match_coincidences(alice, bob, det.coincidence_window)
    return SettingCounts(coincidences, alice.size, bob.size, duration)


def run_chsh(plan: RunPlan) -> tuple[CountTable16, ChshResult]:
    """Counting run per setting, assembled into a table plus CHSH result.

    ``plan.settings`` must cover the standard 4x4 grid (in any order).
    Accidental estimates come from each cell's own singles rates and the
    plan's window convention.
    """
    if set(plan.settings) != set(GRID_SETTINGS):
        raise ValueError("chsh runs need the full 4x4 grid of settings")
    counts = np.zeros((4, 4))
    accidentals = np.zeros((4, 4))
    duration = plan.integration_time
    for alice_angle, bob_angle in plan.settings:
        rng = np.random.default_rng(
            derive_seed(plan.master_seed, "chsh", float(alice_angle), float(bob_angle))
        )
        result = run_setting(plan, alice_angle, bob_angle, rng)
        i = ALICE_ANGLES.index(alice_angle)
        j = BOB_ANGLES.index(bob_angle)
        counts[i, j] = result.coincidences
        accidentals[i, j] = duration * accidental_rate(
            result.singles_alice / duration,
            result.singles_bob / duration,
            plan.detector.coincidence_window,
            plan.accidental_convention,
        )
    table = CountTable16(counts=counts, accidentals=accidentals, integration_time=duration)
    return table, chsh_S(table)


def run_degradation(plan: RunPlan) -> tuple[list[CountRecord], DegradationResult]:
    """Polarizer-free luminosity runs: dark only, gate off, gate on.

    Returns the three records in :data:`DEGRADATION_LABELS` order plus
    the dark-subtracted with/without rotation ratios.
    """
    det = plan.detector
    duration = plan.integration_time

    dark_rng = np.random.default_rng(derive_seed(plan.master_seed, "degradation", "dark"))
    alice_dark = dark_times(det.dark_rate_alice, duration, dark_rng)
    bob_dark = dark_times(det.dark_rate_bob, duration, dark_rng)
    dark_record = CountRecord(
        alice_dark.size,
        bob_dark.size,
        match_coincidences(alice_dark, bob_dark, det.coincidence_window),
        duration,
    )

    records = [dark_record]
    for label, rotation in (("no_rotation", False), ("with_rotation", True)):
        rng = np.random.default_rng(derive_seed(plan.master_seed, "degradation", label))
        result = run_setting(plan, 0.0, 0.0, rng, rotation=rotation, polarized=False)
        records.append(
            CountRecord(result.singles_alice, result.singles_bob, result.coincidences, duration)
        )
    ratios = degradation_ratio(records[2], records[1], records[0])
    return records, ratios


def run_experiment(plan: RunPlan):
    """Dispatch on ``plan.kind``; see :func:`run_chsh` and :func:`run_degradation`."""
    if plan.kind == "chsh":
        return run_chsh(plan)
    if plan.kind == "degradation":
        return run_degradation(plan)
    raise ValueError(f"unknown run kind {plan.kind!r}")


def with_kind(plan: RunPlan, kind: str) -> RunPlan:
    """Copy of ``plan`` with a different run kind."""
    return replace(plan, kind=kind)
