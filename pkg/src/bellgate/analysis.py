"""Count arithmetic: dark subtraction, degradation ratios, accidental
estimates, the two-channel correlation estimator and the CHSH statistic.

The correlation estimator over a quadruple of transmitted-port
coincidence counts is

    E = (c_ab + c_a'b' - c_ab' - c_a'b) / (c_ab + c_a'b' + c_ab' + c_a'b)

where primes denote the +90 degree partner settings, and the CHSH
combination used throughout is

    S = |E(a, b) - E(a, b')| + |E(a', b) + E(a', b')|.

Uncertainties are propagated by assigning each accidental-corrected
count a Poisson variance equal to the corrected count itself; the
conservative alternative (raw + accidental) is available via
``variance="raw"``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .detection import CountRecord

ALICE_ANGLES = (0.0, 45.0, 90.0, 135.0)
BOB_ANGLES = (22.5, 67.5, 112.5, 157.5)

ACCIDENTAL_CONVENTIONS = ("single", "double")


class NumericalError(ArithmeticError):
    """A count computation cannot proceed (zero denominator or the like)."""


@dataclass(frozen=True)
class CountTable16:
    """Coincidence counts over the 4x4 polarizer-setting grid.

    ``counts[i, j]`` belongs to ``alice_angles[i]`` x ``bob_angles[j]``;
    ``accidentals`` holds the per-cell accidental-coincidence estimates
    subtracted before any correlation is formed.  Counts are stored as
    floats so noise-free fractional tables round-trip exactly.
    """

    counts: np.ndarray
    accidentals: np.ndarray
    integration_time: float = 60.0
    alice_angles: tuple[float, ...] = ALICE_ANGLES
    bob_angles: tuple[float, ...] = BOB_ANGLES

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        accidentals = np.asarray(self.accidentals, dtype=float)
        if counts.shape != (4, 4) or accidentals.shape != (4, 4):
            raise ValueError("count and accidental tables must be 4x4")
        if np.any(counts < 0) or np.any(accidentals < 0):
            raise ValueError("counts and accidentals must be non-negative")
        if len(self.alice_angles) != 4 or len(self.bob_angles) != 4:
            raise ValueError("angle grids must have 4 entries each")
        if not self.integration_time > 0:
            raise ValueError("integration time must be positive")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "accidentals", accidentals)

    def corrected(self) -> np.ndarray:
        """Accidental-subtracted counts, floored at zero cell-wise."""
        return np.clip(self.counts - self.accidentals, 0.0, None)


@dataclass(frozen=True)
class ChshResult:
    """Four correlations, their uncertainties, and the CHSH combination."""

    settings: tuple[tuple[float, float], ...]
    E_values: tuple[float, float, float, float]
    E_sigmas: tuple[float, float, float, float]
    S: float
    S_sigma: float


DEGRADATION_COLUMNS = ("singles_alice", "singles_bob", "coincidences")


@dataclass(frozen=True)
class DegradationResult:
    """With-rotation / without-rotation rate ratios, one per count column."""

    ratios: tuple[float, float, float]
    sigmas: tuple[float, float, float]


def dark_subtract(raw: CountRecord, dark: CountRecord) -> CountRecord:
    """Subtract dark rates column-wise, flooring at zero.

    Rates are normalized per second first, so the records may carry
    different durations; the result keeps ``raw``'s duration.  The
    coincidence column is additionally capped at the singles columns so
    the record invariant survives pathological inputs.
    """
    raw_rates = raw.rates
    dark_rates = dark.rates
    sa, sb, c = (
        max(r - d, 0.0) * raw.duration for r, d in zip(raw_rates, dark_rates)
    )
    return CountRecord(sa, sb, min(c, sa, sb), raw.duration)


def degradation_ratio(
    with_rotation: CountRecord, without: CountRecord, dark: CountRecord
) -> DegradationResult:
    """Per-column ratio of dark-subtracted rates, with Poisson sigmas.

    The variance of each dark-subtracted rate is (raw + dark)/duration
    using each record's own duration, propagated through the quotient.
    """
    num = dark_subtract(with_rotation, dark)
    den = dark_subtract(without, dark)
    ratios = []
    sigmas = []
    for col in range(3):
        x = num.rates[col]
        y = den.rates[col]
        if y == 0:
            raise NumericalError(
                f"degradation denominator ({DEGRADATION_COLUMNS[col]})"
                " is zero after dark subtraction"
            )
        var_x = with_rotation.rates[col] / with_rotation.duration + dark.rates[col] / dark.duration
        var_y = without.rates[col] / without.duration + dark.rates[col] / dark.duration
        ratio = x / y
        sigma = math.sqrt(var_x / y**2 + x**2 * var_y / y**4)
        ratios.append(ratio)
        sigmas.append(sigma)
    return DegradationResult(ratios=tuple(ratios), sigmas=tuple(sigmas))


def accidental_rate(r1: float, r2: float, window: float, convention: str = "single") -> float:
    """Expected accidental-coincidence rate from two singles rates.

    ``single`` gives r1*r2*window, ``double`` gives r1*r2*2*window (a
    detection on either side may open the window).
    """
    if r1 < 0 or r2 < 0:
        raise ValueError("singles rates must be non-negative")
    if convention not in ACCIDENTAL_CONVENTIONS:
        raise ValueError(f"unknown accidental convention {convention!r}")
    factor = 2.0 if convention == "double" else 1.0
    return r1 * r2 * factor * window


def correlation_E(c_ab, c_aperp_bperp, c_a_bperp, c_aperp_b) -> tuple[float, float]:
    """Correlation and Poisson sigma from one quadruple of corrected counts.

    With agree = c_ab + c_a'b' and disagree = c_ab' + c_a'b, the
    estimator is (agree - disagree)/total and its variance reduces to
    4 * agree * disagree / total^3 when each count carries variance
    equal to itself.
    """
    counts = (c_ab, c_aperp_bperp, c_a_bperp, c_aperp_b)
    if min(counts) < 0:
        raise ValueError("corrected counts must be non-negative")
    agree = c_ab + c_aperp_bperp
    disagree = c_a_bperp + c_aperp_b
    total = agree + disagree
    if total <= 0:
        raise NumericalError("correlation estimator needs at least one count")
    e = (agree - disagree) / total
    sigma = math.sqrt(4.0 * agree * disagree / total**3)
    return e, sigma


def _angle_index(angles: tuple[float, ...], value: float, axis: str) -> int:
    for i, angle in enumerate(angles):
        if math.isclose(angle, value, abs_tol=1e-9):
            return i
    raise ValueError(
        f"angle grid mismatch: {value} not among {axis} angles {angles}"
    )


def chsh_S(
    table: CountTable16,
    a: float = 0.0,
    a_prime: float = 45.0,
    b: float = 22.5,
    b_prime: float = 67.5,
    variance: str = "corrected",
) -> ChshResult:
    """CHSH statistic from a 16-setting count table.

    Accidentals are subtracted cell-wise (floored at zero), each of the
    four correlations is estimated from its quadruple of cells using the
    +90 degree partner settings, and the four Poisson sigmas combine in
    quadrature.  ``variance="raw"`` uses raw + accidental as the per-cell
    variance instead of the corrected count.
    """
    if variance not in ("corrected", "raw"):
        raise ValueError(f"unknown variance convention {variance!r}")
    corrected = table.corrected()
    variances = table.counts + table.accidentals if variance == "raw" else corrected

    def cell(alice: float, bob: float) -> tuple[float, float]:
        i = _angle_index(table.alice_angles, alice % 180.0, "alice")
        j = _angle_index(table.bob_angles, bob % 180.0, "bob")
        return corrected[i, j], variances[i, j]

    settings = ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))
    e_values = []
    e_sigmas = []
    for alice, bob in settings:
        quad = (
            cell(alice, bob),
            cell(alice + 90.0, bob + 90.0),
            cell(alice, bob + 90.0),
            cell(alice + 90.0, bob),
        )
        counts = [float(q[0]) for q in quad]
        agree = counts[0] + counts[1]
        disagree = counts[2] + counts[3]
        total = agree + disagree
        if total <= 0:
            raise NumericalError(
                f"correlation estimator needs at least one count at ({alice}, {bob})"
            )
        e_values.append((agree - disagree) / total)
        # d E/d c_i = +/- 2 * (opposite-group sum) / total^2
        var = (
            (2.0 * disagree / total**2) ** 2 * float(quad[0][1] + quad[1][1])
            + (2.0 * agree / total**2) ** 2 * float(quad[2][1] + quad[3][1])
        )
        e_sigmas.append(math.sqrt(var))
    s = abs(e_values[0] - e_values[1]) + abs(e_values[2] + e_values[3])
    s_sigma = math.sqrt(sum(sig**2 for sig in e_sigmas))
    return ChshResult(
        settings=settings,
        E_values=tuple(e_values),
        E_sigmas=tuple(e_sigmas),
        S=s,
        S_sigma=s_sigma,
    )


# ---------------------------------------------------------------------------
# Table file formats


def _parse_angles(cells, axis: str) -> tuple[float, ...]:
    try:
        return tuple(float(c) for c in cells)
    except ValueError as exc:
        raise ValueError(f"malformed {axis} angle header: {cells!r}") from exc


def _parse_combined_cell(text: str) -> tuple[float, float]:
    # "226-5" -> count 226, accidental 5; counts are non-negative so the
    # first "-" is always the separator.
    parts = text.strip().split("-", 1)
    if len(parts) != 2:
        raise ValueError(f"malformed cell {text!r}; expected 'count-accidental'")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ValueError(f"malformed cell {text!r}") from exc


def _read_grid(path):
    """Common layout: header 'bob_angle,<alice angles>', rows start with
    the bob angle.  Returns (alice_angles, bob_angles, raw cell strings
    indexed [alice][bob])."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
    if not rows or rows[0][0].strip() != "bob_angle" or len(rows[0]) != 5:
        raise ValueError(
            f"{path}: table CSV must start with 'bob_angle,<four alice angles>'"
        )
    alice_angles = _parse_angles(rows[0][1:], "alice")
    if len(rows) != 5:
        raise ValueError(f"{path}: expected 4 data rows, found {len(rows) - 1}")
    bob_angles = []
    cells = [[None] * 4 for _ in range(4)]
    for j, row in enumerate(rows[1:]):
        if len(row) != 5:
            raise ValueError(f"{path}: row {row!r} must have 5 columns")
        bob_angles.append(_parse_angles(row[:1], "bob")[0])
        for i in range(4):
            cells[i][j] = row[1 + i]
    return alice_angles, tuple(bob_angles), cells


def read_table_csv(path, accidentals_path=None, integration_time: float = 60.0) -> CountTable16:
    """Parse a 16-setting count table.

    Single-file form: each cell is ``count-accidental`` (e.g. ``226-5``).
    Two-file form: ``path`` holds plain counts and ``accidentals_path``
    plain accidentals on the same grid.
    """
    alice_angles, bob_angles, cells = _read_grid(path)
    counts = np.zeros((4, 4))
    accidentals = np.zeros((4, 4))
    if accidentals_path is None:
        for i in range(4):
            for j in range(4):
                counts[i, j], accidentals[i, j] = _parse_combined_cell(cells[i][j])
    else:
        for i in range(4):
            for j in range(4):
                try:
                    counts[i, j] = float(cells[i][j])
                except ValueError as exc:
                    raise ValueError(f"malformed count cell {cells[i][j]!r}") from exc
        acc_alice, acc_bob, acc_cells = _read_grid(accidentals_path)
        if acc_alice != alice_angles or acc_bob != bob_angles:
            raise ValueError("accidentals file angle grid differs from counts file")
        for i in range(4):
            for j in range(4):
                try:
                    accidentals[i, j] = float(acc_cells[i][j])
                except ValueError as exc:
                    raise ValueError(
                        f"malformed accidental cell {acc_cells[i][j]!r}"
                    ) from exc
    return CountTable16(
        counts=counts,
        accidentals=accidentals,
        integration_time=integration_time,
        alice_angles=alice_angles,
        bob_angles=bob_angles,
    )


def _format_number(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return f"{x:g}"


def write_table_csv(table: CountTable16, path) -> None:
    """Write the single-file ``count-accidental`` layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bob_angle"] + [_format_number(a) for a in table.alice_angles])
        for j, bob in enumerate(table.bob_angles):
            row = [_format_number(bob)]
            for i in range(4):
                row.append(
                    f"{_format_number(table.counts[i, j])}-"
                    f"{_format_number(table.accidentals[i, j])}"
                )
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Reports


def format_chsh_text(result: ChshResult) -> str:
    """Human-readable correlation/CHSH report."""
    lines = [f"{'setting (alice, bob)':<24}{'E':>10}{'sigma':>10}"]
    for (alice, bob), e, sig in zip(result.settings, result.E_values, result.E_sigmas):
        label = f"({_format_number(alice)}, {_format_number(bob)})"
        lines.append(f"{label:<24}{e:>+10.4f}{sig:>10.4f}")
    lines.append(f"S = {result.S:.4f} +/- {result.S_sigma:.4f}")
    return "\n".join(lines) + "\n"


def write_chsh_csv(result: ChshResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quantity", "alice_angle", "bob_angle", "value", "sigma"])
        for (alice, bob), e, sig in zip(result.settings, result.E_values, result.E_sigmas):
            writer.writerow(
                ["E", _format_number(alice), _format_number(bob), repr(e), repr(sig)]
            )
        writer.writerow(["S", "", "", repr(result.S), repr(result.S_sigma)])
