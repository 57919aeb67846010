"""Hybrid motion/stiffness virtual fixture and its haptic rendering.

Once the operator anchors the fixture at the sampling target, every
commanded displacement delta (expressed in the fixture frame, relative to
the anchored centerline point) is projected onto the feasible set

    x^2 + y^2 <= r_throat^2
    arc_length(origin + delta) <= l_button + f_safety / k_axial

The first constraint keeps the tool inside the throat area; the second
caps the insertion so the axial contact force cannot exceed the safety
budget.  The projection is staged: an exact radial clamp onto the disk,
then a bisected retraction along z until the arc-length bound holds.  The
staged result approximates the exact closest feasible point; its quality
is pinned against a brute-force oracle in the tests.

Violations feed the haptic channel: the clipped motion (task space) and the
clipped configuration change (config space) are scaled by spring gains,
combined through the wrist Jacobian, and mirrored to the operator device
through the master mapping, capped in magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    IkUnreachableError,
    InvalidTargetError,
    OutOfRangeError,
    UnreachableError,
)
from .kinematics import (
    ConfigState,
    WristGeometry,
    _config_from_point,
    tip_to_config,
    wrap_angle,
)
from .mapping import MasterMapping

# throat radius limits, mm (the console exposes the diameter, 20 to 60 mm)
R_THROAT_MIN_MM = 10.0
R_THROAT_MAX_MM = 30.0

# device-side force cap, N
MASTER_FORCE_CAP_N = 3.0

# bisection termination: arc-length residual, mm, and iteration cap
_RESIDUAL_TOL_MM = 1e-6
_MAX_BISECTIONS = 60


@dataclass(frozen=True, eq=False)
class FixtureSpec:
    """Anchored fixture parameters, fixed at trigger time."""

    origin_mm: np.ndarray
    r_throat_mm: float
    l_button_mm: float
    k_axial_effective_n_per_mm: float
    f_safety_n: float = 0.588
    enabled: bool = True

    def __post_init__(self) -> None:
        if not R_THROAT_MIN_MM <= self.r_throat_mm <= R_THROAT_MAX_MM:
            raise OutOfRangeError(
                f"throat radius {self.r_throat_mm:g} mm outside "
                f"[{R_THROAT_MIN_MM:g}, {R_THROAT_MAX_MM:g}] mm"
            )
        if self.l_button_mm <= 0.0:
            raise OutOfRangeError("anchored arc length must be positive")
        if self.k_axial_effective_n_per_mm <= 0.0 or self.f_safety_n <= 0.0:
            raise OutOfRangeError("stiffness and force budget must be positive")

    def length_bound_mm(self) -> float:
        """Largest admissible arc length: anchor plus the safe deflection."""
        return self.l_button_mm + self.f_safety_n / self.k_axial_effective_n_per_mm


@dataclass(frozen=True)
class HapticGains:
    """Spring gains for the two violation forces."""

    k_motion_n_per_mm: float = 0.5
    k_stiffness: float = 0.5

    def __post_init__(self) -> None:
        if self.k_motion_n_per_mm < 0.0 or self.k_stiffness < 0.0:
            raise OutOfRangeError("haptic gains must be nonnegative")


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Outcome of projecting one commanded displacement.

    ``command_config`` is the validated configuration reaching the command,
    or None when the commanded point is outside the wrist envelope (the
    caller then holds the last valid configuration).
    """

    delta_cmd_mm: np.ndarray
    motion_violation_mm: np.ndarray
    stiffness_violation: np.ndarray
    active_constraints: frozenset[str]
    command_config: ConfigState | None


@dataclass(frozen=True, eq=False)
class ConstraintForce:
    """Constraint reaction rendered to the operator."""

    task_force_n: np.ndarray
    master_force_n: np.ndarray
    capped: bool


def _solve_config(point_abs: np.ndarray, geom: WristGeometry) -> ConfigState | None:
    try:
        return tip_to_config(point_abs, geom)
    except (UnreachableError, InvalidTargetError):
        return None


def _arc_length_of(point_abs: np.ndarray, geom: WristGeometry) -> float | None:
    """Arc length reaching an absolute centerline point, None if out of reach."""
    x, y, z = float(point_abs[0]), float(point_abs[1]), float(point_abs[2])
    if z <= 0.0:
        return None
    _, beta, length = _config_from_point(x, y, z)
    if beta > geom.max_bend_rad:
        return None
    return length


def project(
    delta_s_mm: np.ndarray,
    fixture: FixtureSpec,
    current_q: ConfigState,
    geom: WristGeometry,
) -> ProjectionResult:
    """Project a commanded displacement onto the fixture's feasible set.

    Stage 1 clamps (x, y) radially onto the throat disk; stage 2 bisects a
    retraction along z until the arc-length bound holds, stopping at a
    residual below 1e-6 mm.  The returned command never overshoots the
    bound, so the downstream force cap is airtight.  The motion violation
    is the displacement removed by stage 1 (task space, mm); the stiffness
    violation is the configuration change applied by stage 2 (bend-plane
    angle difference scaled by the commanded bend, bend difference,
    arc-length difference), measured against the stage 1 point so the two
    springs never render the same violation twice.  A command already
    feasible passes through bit-exact with no active constraints.
    ``current_q`` is the wrist configuration the command was issued from;
    the staged solver itself is stateless.  Raises IkUnreachableError when
    no point on the retraction line is feasible.  A disabled fixture passes
    everything through unchanged with zero violations.
    """
    delta = np.asarray(delta_s_mm, dtype=float)
    if not fixture.enabled:
        cmd = delta.copy()
        return ProjectionResult(
            cmd,
            np.zeros(3),
            np.zeros(3),
            frozenset(),
            _solve_config(fixture.origin_mm + cmd, geom),
        )

    active: set[str] = set()

    # stage 1: exact projection onto the disk in x-y
    clamped = delta.copy()
    radial = math.hypot(delta[0], delta[1])
    if radial > fixture.r_throat_mm:
        scale = fixture.r_throat_mm / radial
        clamped[0] *= scale
        clamped[1] *= scale
        active.add("motion")
    motion_violation = delta - clamped

    # stage 2: retract along z until the arc-length bound holds; a command
    # outside the wrist envelope altogether (length None) is not a fixture
    # violation and is left for the caller's saturation handling
    bound = fixture.length_bound_mm()
    command = clamped.copy()
    length = _arc_length_of(fixture.origin_mm + command, geom)
    if length is not None and length > bound:
        command[2] = _retract_depth(clamped, fixture, geom, bound)
        active.add("stiffness")

    if "stiffness" in active:
        px, py, pz = fixture.origin_mm + clamped
        a_raw, b_raw, l_raw = _config_from_point(px, py, max(pz, 1e-9))
        cx, cy, cz = fixture.origin_mm + command
        a_cmd, b_cmd, l_cmd = _config_from_point(cx, cy, cz)
        stiffness_violation = np.array(
            [
                wrap_angle(a_cmd - a_raw) * b_cmd,
                b_cmd - b_raw,
                l_cmd - l_raw,
            ]
        )
    else:
        stiffness_violation = np.zeros(3)

    return ProjectionResult(
        command,
        motion_violation,
        stiffness_violation,
        frozenset(active),
        _solve_config(fixture.origin_mm + command, geom),
    )


def _retract_depth(
    clamped: np.ndarray, fixture: FixtureSpec, geom: WristGeometry, bound: float
) -> float:
    """Find the deepest z on the clamped vertical line meeting the bound."""
    origin = fixture.origin_mm

    def feasible(z_rel: float) -> tuple[bool, float]:
        point = np.array([clamped[0], clamped[1], z_rel]) + origin
        length = _arc_length_of(point, geom)
        if length is None:
            return False, math.inf
        return length <= bound, length

    z_hi = float(clamped[2])
    # search downward for a feasible bracket end, starting at the anchor plane
    z_lo = min(0.0, z_hi)
    ok, _ = feasible(z_lo)
    step = 5.0
    while not ok:
        if origin[2] + z_lo <= 1e-6:
            raise IkUnreachableError(
                "no feasible insertion depth on the clamped command line"
            )
        z_lo = max(z_lo - step, -float(origin[2]) + 1e-6)
        ok, _ = feasible(z_lo)

    best = z_lo
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (z_lo + z_hi)
        ok, length = feasible(mid)
        if ok:
            best = mid
            z_lo = mid
            if bound - length < _RESIDUAL_TOL_MM:
                break
        else:
            z_hi = mid
    return best


def motion_force(violation_mm: np.ndarray, gains: HapticGains) -> np.ndarray:
    """Spring force from the clipped motion, task frame, N."""
    return gains.k_motion_n_per_mm * np.asarray(violation_mm, dtype=float)


def stiffness_force(violation_cfg: np.ndarray, gains: HapticGains) -> np.ndarray:
    """Spring force from the clipped configuration change, config frame."""
    return gains.k_stiffness * np.asarray(violation_cfg, dtype=float)


def master_force(
    motion_f: np.ndarray,
    stiffness_f: np.ndarray,
    jacobian: np.ndarray,
    mapping: MasterMapping,
    cap_n: float = MASTER_FORCE_CAP_N,
) -> ConstraintForce:
    """Combine the violation springs and mirror them to the operator device.

    Task force is the motion spring plus the configuration spring pushed
    through the wrist Jacobian; the device force is the axis map transpose
    applied to it, magnitude-capped at ``cap_n``.
    """
    task = np.asarray(motion_f, dtype=float) + jacobian @ np.asarray(
        stiffness_f, dtype=float
    )
    raw = mapping.axis_map.T @ task
    norm = float(np.linalg.norm(raw))
    if norm > cap_n:
        return ConstraintForce(task, raw * (cap_n / norm), True)
    return ConstraintForce(task, raw, False)
