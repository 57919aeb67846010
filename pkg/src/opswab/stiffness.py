"""Pressure-tunable wrist stiffness and swab series composition.

The wrist chambers are pressurised between -30 and 90 kPa; stiffness rises
with pressure.  A mounted swab acts as a spring in series with the wrist, so
the stiffness felt at the tip is k_eff = k_w * k_s / (k_w + k_s) per axis
(axial in N/mm, lateral in N/rad).  Calibration inverts that relation from
bench measurements of the assembled pair: k_w = k_eff * k_s / (k_s - k_eff).

The shipped default table is derived from measurements taken with the wooden
and metal swabs mounted; the plastic swab's axial rows disagree with the
other two by far more than the measurement spread and are rejected by the
consistency filter (its lateral rows agree and are usable).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    ConfigError,
    InconsistentDataError,
    OutOfCalibrationRangeError,
    OutOfRangeError,
)

# chamber pressure command range, kPa
PRESSURE_MIN_KPA = -30.0
PRESSURE_MAX_KPA = 90.0
# linear extrapolation allowance past the calibration hull, kPa
EXTRAPOLATION_MARGIN_KPA = 10.0
# contact force budget: 60 g load as used in the safety bound
F_SAFETY_N = 0.588

CSV_HEADER = ("pressure_kpa", "axial_n_per_mm", "lateral_n_per_rad")

# pressures at which the assembled wrist+swab stiffness was measured, kPa
CAL_PRESSURES_KPA = (0.0, 30.0, 60.0, 90.0)

# bench-measured effective stiffness of the assembled wrist+swab pair,
# per mounted swab, at CAL_PRESSURES_KPA (axial N/mm, lateral N/rad)
MEASURED_EFFECTIVE = {
    "plastic": {
        "axial": (0.972, 1.101, 1.161, 1.193),
        "lateral": (1.107, 1.115, 1.117, 1.119),
    },
    "wood": {
        "axial": (2.856, 4.364, 5.4659, 6.269),
        "lateral": (5.860, 6.092, 6.167, 6.223),
    },
    "metal": {
        "axial": (3.010, 4.735, 6.061, 7.064),
        "lateral": (31.532, 39.639, 43.049, 45.930),
    },
}


@dataclass(frozen=True)
class StiffnessPair:
    """Stiffness along the tool axis and across it."""

    axial_n_per_mm: float
    lateral_n_per_rad: float


@dataclass(frozen=True)
class SwabSpec:
    """Bending stiffness of a swab stick, measured clamped at the gripper."""

    name: str
    axial_n_per_mm: float
    lateral_n_per_rad: float
    length_mm: float = 150.0


def default_swabs() -> dict[str, SwabSpec]:
    """Swab sticks characterised for this wrist, by shaft material."""
    return {
        "plastic": SwabSpec("plastic", 1.2851, 1.1287),
        "wood": SwabSpec("wood", 13.2447, 6.5318),
        "metal": SwabSpec("metal", 17.5054, 70.6099),
    }


@dataclass(frozen=True)
class CalibrationTable:
    """Wrist-only stiffness vs chamber pressure, piecewise linear."""

    pressures_kpa: tuple[float, ...]
    axial_n_per_mm: tuple[float, ...]
    lateral_n_per_rad: tuple[float, ...]

    def __post_init__(self) -> None:
        n = len(self.pressures_kpa)
        if n < 2:
            raise ConfigError("calibration needs at least two pressure rows")
        if len(self.axial_n_per_mm) != n or len(self.lateral_n_per_rad) != n:
            raise ConfigError("calibration columns differ in length")
        if any(
            b <= a for a, b in zip(self.pressures_kpa, self.pressures_kpa[1:])
        ):
            raise ConfigError("calibration pressures must be strictly increasing")
        if any(v <= 0.0 for v in self.axial_n_per_mm + self.lateral_n_per_rad):
            raise ConfigError("calibration stiffness values must be positive")


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of a calibration fit: the table plus per-row diagnostics."""

    table: CalibrationTable
    excluded: tuple[str, ...]
    # worst relative deviation among the swabs kept for each pressure row
    spread: dict[str, tuple[float, ...]]


def check_pressure(pressure_kpa: float) -> None:
    """Raise OutOfRangeError unless the command is inside the chamber range."""
    if not PRESSURE_MIN_KPA <= pressure_kpa <= PRESSURE_MAX_KPA:
        raise OutOfRangeError(
            f"pressure {pressure_kpa:g} kPa outside "
            f"[{PRESSURE_MIN_KPA:g}, {PRESSURE_MAX_KPA:g}] kPa"
        )


@dataclass(frozen=True)
class PressureSetting:
    """Validated chamber pressure command."""

    pressure_kpa: float

    def __post_init__(self) -> None:
        check_pressure(self.pressure_kpa)


def _interp_one(
    pressure: float, knots: Sequence[float], values: Sequence[float]
) -> float:
    lo, hi = knots[0], knots[-1]
    if pressure < lo - EXTRAPOLATION_MARGIN_KPA or pressure > hi + EXTRAPOLATION_MARGIN_KPA:
        raise OutOfCalibrationRangeError(
            f"pressure {pressure:g} kPa outside calibrated range "
            f"[{lo:g}, {hi:g}] kPa plus {EXTRAPOLATION_MARGIN_KPA:g} kPa margin"
        )
    if pressure < lo:
        slope = (values[1] - values[0]) / (knots[1] - knots[0])
        return values[0] + slope * (pressure - lo)
    if pressure > hi:
        slope = (values[-1] - values[-2]) / (knots[-1] - knots[-2])
        return values[-1] + slope * (pressure - hi)
    # piecewise linear between the bracketing knots
    for i in range(len(knots) - 1):
        if pressure <= knots[i + 1]:
            t = (pressure - knots[i]) / (knots[i + 1] - knots[i])
            return values[i] + t * (values[i + 1] - values[i])
    raise AssertionError("unreachable")


def wrist_stiffness(
    table: CalibrationTable, pressure_kpa: float | PressureSetting
) -> StiffnessPair:
    """Wrist-only stiffness at a chamber pressure.

    Piecewise linear inside the calibration hull; the edge segments
    extrapolate up to EXTRAPOLATION_MARGIN_KPA past it, beyond which
    OutOfCalibrationRangeError is raised.
    """
    if isinstance(pressure_kpa, PressureSetting):
        pressure_kpa = pressure_kpa.pressure_kpa
    return StiffnessPair(
        _interp_one(pressure_kpa, table.pressures_kpa, table.axial_n_per_mm),
        _interp_one(pressure_kpa, table.pressures_kpa, table.lateral_n_per_rad),
    )


def effective_stiffness(wrist: StiffnessPair, swab: SwabSpec) -> StiffnessPair:
    """Series composition of wrist and swab, felt at the swab tip."""
    return StiffnessPair(
        _series(wrist.axial_n_per_mm, swab.axial_n_per_mm),
        _series(wrist.lateral_n_per_rad, swab.lateral_n_per_rad),
    )


def _series(k_wrist: float, k_swab: float) -> float:
    return k_wrist * k_swab / (k_wrist + k_swab)


def invert_effective(k_eff: float, k_swab: float) -> float:
    """Wrist stiffness implied by an assembled-pair measurement.

    Inverse of the series relation.  The series value can never reach the
    swab stiffness, so k_eff >= k_swab raises InconsistentDataError.
    """
    if k_eff <= 0.0 or k_swab <= 0.0:
        raise OutOfRangeError("stiffness values must be positive")
    if k_eff >= k_swab:
        raise InconsistentDataError(
            f"effective stiffness {k_eff:g} not below swab stiffness {k_swab:g}"
        )
    return k_eff * k_swab / (k_swab - k_eff)


def safe_deflection(k_axial_n_per_mm: float, f_safety_n: float = F_SAFETY_N) -> float:
    """Axial deflection allowance, mm, at which the contact force budget is met."""
    if k_axial_n_per_mm <= 0.0:
        raise OutOfRangeError("axial stiffness must be positive")
    return f_safety_n / k_axial_n_per_mm


def calibrate_from_effective(
    pressures_kpa: Sequence[float],
    measured: Mapping[str, Mapping[str, Sequence[float]]],
    swabs: Mapping[str, SwabSpec],
    spread_tol: float = 0.30,
) -> CalibrationResult:
    """Recover wrist-only stiffness from assembled-pair measurements.

    Per swab and pressure the series relation is inverted,
    k_w = k_eff * k_s / (k_s - k_eff).  A row with k_eff >= k_s carries no
    information about the wrist (the series value can never reach the swab
    stiffness) and is dropped with a report.  A swab whose inverted values
    stray more than ``spread_tol`` (relative) from the consensus of the other
    swabs at any pressure is dropped entirely for that axis.  Remaining
    values are averaged per pressure.
    """
    excluded: list[str] = []
    spread: dict[str, tuple[float, ...]] = {}
    columns: dict[str, tuple[float, ...]] = {}
    for axis in ("axial", "lateral"):
        inverted: dict[str, list[float | None]] = {}
        for name, series_by_axis in measured.items():
            swab = swabs[name]
            k_swab = swab.axial_n_per_mm if axis == "axial" else swab.lateral_n_per_rad
            values: list[float | None] = []
            for pressure, k_eff in zip(pressures_kpa, series_by_axis[axis]):
                try:
                    values.append(invert_effective(k_eff, k_swab))
                except InconsistentDataError:
                    excluded.append(
                        f"{name} {axis} at {pressure:g} kPa: effective "
                        f"{k_eff:g} not below swab stiffness {k_swab:g}"
                    )
                    values.append(None)
            inverted[name] = values

        # consistency filter: drop a swab when any row strays from the others
        kept = dict(inverted)
        for name, values in inverted.items():
            worst = 0.0
            for i, value in enumerate(values):
                if value is None:
                    continue
                others = [
                    v[i]
                    for other, v in inverted.items()
                    if other != name and v[i] is not None
                ]
                if not others:
                    continue
                consensus = sum(others) / len(others)
                worst = max(worst, abs(value - consensus) / consensus)
            if worst > spread_tol:
                excluded.append(
                    f"{name} {axis}: deviates {worst:.0%} from the other swabs "
                    f"(tolerance {spread_tol:.0%})"
                )
                del kept[name]

        table_column: list[float] = []
        row_spread: list[float] = []
        for i, pressure in enumerate(pressures_kpa):
            row = [v[i] for v in kept.values() if v[i] is not None]
            if not row:
                raise InconsistentDataError(
                    f"no usable {axis} measurement at {pressure:g} kPa"
                )
            mean = sum(row) / len(row)
            table_column.append(mean)
            row_spread.append(max(abs(v - mean) / mean for v in row))
        columns[axis] = tuple(table_column)
        spread[axis] = tuple(row_spread)

    table = CalibrationTable(
        tuple(float(p) for p in pressures_kpa), columns["axial"], columns["lateral"]
    )
    return CalibrationResult(table, tuple(excluded), spread)


@lru_cache(maxsize=1)
def default_calibration() -> CalibrationTable:
    """Wrist calibration shipped with the package.

    Derived from the wooden and metal swab measurements; the plastic swab is
    left out because its axial rows fail the consistency filter against the
    other two.
    """
    swabs = default_swabs()
    measured = {name: MEASURED_EFFECTIVE[name] for name in ("wood", "metal")}
    return calibrate_from_effective(CAL_PRESSURES_KPA, measured, swabs).table


def save_calibration(table: CalibrationTable, path: str | Path) -> None:
    """Write a calibration as CSV with the canonical header."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for row in zip(table.pressures_kpa, table.axial_n_per_mm, table.lateral_n_per_rad):
            writer.writerow([repr(v) for v in row])


def load_calibration(path: str | Path) -> CalibrationTable:
    """Read a calibration CSV written by save_calibration."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise ConfigError(
                f"calibration file {path} must start with header {','.join(CSV_HEADER)}"
            )
        rows = []
        for line in reader:
            if not line or not any(field.strip() for field in line):
                continue
            try:
                rows.append(tuple(float(field) for field in line[:3]))
            except ValueError as exc:
                raise ConfigError(f"bad calibration row {line!r}") from exc
    if not rows:
        raise ConfigError(f"calibration file {path} has no data rows")
    pressures, axial, lateral = zip(*rows)
    return CalibrationTable(pressures, axial, lateral)


