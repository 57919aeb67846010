"""Simulated testee: throat surface, contact forces, sampling success.

The throat is a horizontal plane at a fixed scene depth carrying a disk
target patch (the smeared-medium stand-in).  Contact is a memoryless
spring evaluation of a tip pose in scene coordinates (wrist frame plus
insertion travel on z): axial force is the effective stiffness times the
penetration, lateral force is the effective lateral stiffness times the
small swab deflection angle, penetration * sin(tilt) / swab_length, so
both components vanish continuously at contact onset.

Success is judged from a recorded session trace: cumulative dwell on the
target patch with the normal force inside the sampling window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import OutOfRangeError
from .kinematics import TipPose
from .stiffness import F_SAFETY_N, StiffnessPair
from .teleop import TraceRow

DEFAULT_Z_THROAT_MM = 185.0
DEFAULT_SWAB_LENGTH_MM = 150.0

# sampling-force window and dwell needed for a successful smear
MIN_SAMPLING_FORCE_N = 0.05
MAX_SAMPLING_FORCE_N = F_SAFETY_N
MIN_DWELL_S = 0.5


@dataclass(frozen=True)
class PhantomModel:
    """Throat plane at scene depth z with a target patch on it."""

    z_throat_mm: float = DEFAULT_Z_THROAT_MM
    cavity_radius_mm: float = 20.0
    patch_center_mm: tuple[float, float] = (0.0, 0.0)
    patch_radius_mm: float = 5.0

    def __post_init__(self) -> None:
        if self.z_throat_mm <= 0.0:
            raise OutOfRangeError("throat depth must be positive")
        if self.cavity_radius_mm <= 0.0 or self.patch_radius_mm <= 0.0:
            raise OutOfRangeError("radii must be positive")
        reach = math.hypot(*self.patch_center_mm) + self.patch_radius_mm
        if reach > self.cavity_radius_mm:
            raise OutOfRangeError("target patch must lie inside the cavity")


@dataclass(frozen=True)
class ContactReport:
    in_contact: bool
    penetration_mm: float
    normal_force_n: float
    lateral_force_n: float
    on_target: bool


@dataclass(frozen=True)
class SuccessReport:
    success: bool
    dwell_s: float


def _on_patch(x_mm: float, y_mm: float, phantom: PhantomModel) -> bool:
    cx, cy = phantom.patch_center_mm
    return math.hypot(x_mm - cx, y_mm - cy) <= phantom.patch_radius_mm


def _report(
    x_mm: float,
    y_mm: float,
    z_mm: float,
    sin_tilt: float,
    phantom: PhantomModel,
    k_eff: StiffnessPair,
    swab_length_mm: float,
) -> ContactReport:
    penetration = max(0.0, z_mm - phantom.z_throat_mm)
    if penetration == 0.0:
        return ContactReport(False, 0.0, 0.0, 0.0, False)
    deflection_rad = penetration * sin_tilt / swab_length_mm
    return ContactReport(
        in_contact=True,
        penetration_mm=penetration,
        normal_force_n=k_eff.axial_n_per_mm * penetration,
        lateral_force_n=k_eff.lateral_n_per_rad * deflection_rad,
        on_target=_on_patch(x_mm, y_mm, phantom),
    )


def contact(
    tip: TipPose,
    phantom: PhantomModel,
    k_eff: StiffnessPair,
    swab_length_mm: float = DEFAULT_SWAB_LENGTH_MM,
) -> ContactReport:
    """Spring contact of a scene-frame tip pose against the throat plane."""
    x, y, z = (float(v) for v in tip.position_mm)
    # tilt of the tool axis from vertical, from the rotation's third column
    sin_tilt = math.hypot(float(tip.orientation[0, 2]), float(tip.orientation[1, 2]))
    return _report(x, y, z, sin_tilt, phantom, k_eff, swab_length_mm)


def _row_report(
    row: TraceRow,
    phantom: PhantomModel,
    k_eff: StiffnessPair,
    swab_length_mm: float,
) -> ContactReport:
    # trace rows store scene-frame tip position and the wrist bend angle;
    # for the constant-curvature tool the axis tilt equals the bend
    return _report(
        row.x_mm,
        row.y_mm,
        row.z_mm,
        abs(math.sin(row.beta_rad)),
        phantom,
        k_eff,
        swab_length_mm,
    )


def max_normal_force(
    trace: Sequence[TraceRow],
    phantom: PhantomModel,
    k_eff: StiffnessPair,
    swab_length_mm: float = DEFAULT_SWAB_LENGTH_MM,
) -> float:
    """Largest normal contact force anywhere in a trace, newtons."""
    peak = 0.0
    for row in trace:
        rep = _row_report(row, phantom, k_eff, swab_length_mm)
        peak = max(peak, rep.normal_force_n)
    return peak


def evaluate_success(
    trace: Sequence[TraceRow],
    phantom: PhantomModel,
    k_eff: StiffnessPair,
    swab_length_mm: float = DEFAULT_SWAB_LENGTH_MM,
) -> SuccessReport:
    """Judge a recorded session: enough gentle on-target dwell to sample.

    A row counts toward the dwell when the tip is on the target patch with
    the normal force inside (MIN_SAMPLING_FORCE_N, MAX_SAMPLING_FORCE_N].
    Success needs MIN_DWELL_S seconds of cumulative qualifying time.
    """
    dwell = 0.0
    prev_t = 0.0
    for row in trace:
        dt = row.t_s - prev_t
        prev_t = row.t_s
        rep = _row_report(row, phantom, k_eff, swab_length_mm)
        if (
            rep.on_target
            and MIN_SAMPLING_FORCE_N < rep.normal_force_n <= MAX_SAMPLING_FORCE_N
        ):
            dwell += dt
    return SuccessReport(success=dwell >= MIN_DWELL_S, dwell_s=dwell)
