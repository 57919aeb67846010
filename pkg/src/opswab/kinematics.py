"""Constant-curvature kinematics of a three-cable continuum wrist.

The wrist is a single bending segment driven by three cables spaced 120
degrees apart on a pitch circle of radius ``cable_pitch_mm``.  Configuration
space is (alpha, beta, l): bend-plane azimuth in (-pi, pi], total bend angle
in [0, max_bend], and centerline arc length.  Lengths are millimetres,
angles radians.

Cable i sits at azimuth theta_i = 2*pi*(i-1)/3 + pi/2 on the pitch circle,
so cable length obeys

    l_i = l - d * beta * cos(theta_i - alpha)

and the inverse recovers the bend from the two in-plane components

    d * beta * sin(alpha) = l - l1
    d * beta * cos(alpha) = (l2 - l3) / sqrt(3)

The base frame has z along the straight wrist axis.  The arc endpoint is

    p = (l/beta) * ((1 - cos beta) cos alpha, (1 - cos beta) sin alpha, sin beta)

with orientation Rz(alpha) * Ry(beta) * Rz(-alpha), and the tool point adds a
rigid extension of ``tip_offset_mm`` along the local z axis (gripper plus
mounted swab).  The straight configuration beta -> 0 is handled by series so
every map is smooth through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidTargetError, OutOfRangeError, UnreachableError

_SQRT3 = math.sqrt(3.0)
# below this bend the wrist is reported as exactly straight
_STRAIGHT_BEND_RAD = 1e-12
# below this bend the closed forms switch to their series expansions;
# the direct (1 - cos b)/b form loses ~eps/b^2 relative accuracy, so the
# crossover sits where both sides are accurate to ~1e-12
_SERIES_BEND_RAD = 1e-2
# slack for re-validating values produced by roundtrips at the box edge
_LIMIT_SLACK = 1e-9


@dataclass(frozen=True)
class WristGeometry:
    """Physical constants of the wrist and its cable drive (mm, rad)."""

    cable_pitch_mm: float = 30.0
    rest_length_mm: float = 65.0
    cable_min_mm: float = 45.0
    cable_max_mm: float = 85.0
    max_bend_rad: float = math.pi / 2.0
    tip_offset_mm: float = 80.0


@dataclass(frozen=True)
class ActuatorLengths:
    """Commanded lengths of the three drive cables, mm."""

    l1_mm: float
    l2_mm: float
    l3_mm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.l1_mm, self.l2_mm, self.l3_mm])


@dataclass(frozen=True)
class ConfigState:
    """Arc configuration: bend-plane azimuth, bend angle, arc length."""

    alpha_rad: float
    beta_rad: float
    length_mm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha_rad, self.beta_rad, self.length_mm])


@dataclass(frozen=True)
class TipPose:
    """Tool-point pose in the wrist base frame."""

    position_mm: np.ndarray
    orientation: np.ndarray


def wrap_angle(angle_rad: float) -> float:
    """Wrap to the canonical interval (-pi, pi]."""
    wrapped = math.remainder(angle_rad, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped = math.pi
    return wrapped


def check_cables(lengths: ActuatorLengths, geom: WristGeometry) -> None:
    """Raise OutOfRangeError unless every cable is inside its travel.

    Values within 1e-9 mm of a limit are accepted; roundtrips of
    configurations sitting exactly on the box edge re-emit them.
    """
    for value in (lengths.l1_mm, lengths.l2_mm, lengths.l3_mm):
        if (
            value < geom.cable_min_mm - _LIMIT_SLACK
            or value > geom.cable_max_mm + _LIMIT_SLACK
        ):
            raise OutOfRangeError(
                f"cable length {value:.6g} mm outside "
                f"[{geom.cable_min_mm:g}, {geom.cable_max_mm:g}] mm"
            )


def check_config(q: ConfigState, geom: WristGeometry) -> None:
    """Raise OutOfRangeError unless the configuration is inside its box."""
    if not -math.pi < q.alpha_rad <= math.pi + _LIMIT_SLACK:
        raise OutOfRangeError(f"bend azimuth {q.alpha_rad:.6g} rad outside (-pi, pi]")
    if q.beta_rad < -_LIMIT_SLACK or q.beta_rad > geom.max_bend_rad + _LIMIT_SLACK:
        raise OutOfRangeError(
            f"bend angle {q.beta_rad:.6g} rad outside [0, {geom.max_bend_rad:.6g}]"
        )
    if (
        q.length_mm < geom.cable_min_mm - _LIMIT_SLACK
        or q.length_mm > geom.cable_max_mm + _LIMIT_SLACK
    ):
        raise OutOfRangeError(
            f"arc length {q.length_mm:.6g} mm outside "
            f"[{geom.cable_min_mm:g}, {geom.cable_max_mm:g}] mm"
        )


def config_to_actuator(q: ConfigState, geom: WristGeometry) -> ActuatorLengths:
    """Cable lengths realizing configuration ``q``.

    Raises OutOfRangeError if the configuration or any resulting cable
    leaves its limits.
    """
    check_config(q, geom)
    offset = geom.cable_pitch_mm * q.beta_rad
    cables = [
        q.length_mm - offset * math.cos(2.0 * math.pi * i / 3.0 + math.pi / 2.0 - q.alpha_rad)
        for i in range(3)
    ]
    lengths = ActuatorLengths(*cables)
    check_cables(lengths, geom)
    # pin sub-nanometre overshoot at the travel limits back onto the box
    clamped = [min(max(c, geom.cable_min_mm), geom.cable_max_mm) for c in cables]
    return ActuatorLengths(*clamped)


def actuator_to_config(lengths: ActuatorLengths, geom: WristGeometry) -> ConfigState:
    """Configuration realized by cable lengths; exact inverse of config_to_actuator.

    Curvature follows kappa = 2*sqrt(l1^2+l2^2+l3^2-l1*l2-l1*l3-l2*l3) /
    (d*(l1+l2+l3)) with beta = kappa * l, and the azimuth comes from the
    quadrant-correct arctangent of the in-plane bend components.
    """
    check_cables(lengths, geom)
    l1, l2, l3 = lengths.l1_mm, lengths.l2_mm, lengths.l3_mm
    total = l1 + l2 + l3
    length = total / 3.0
    # l1^2+l2^2+l3^2-l1*l2-l1*l3-l2*l3 in the cancellation-free difference form
    spread = 0.5 * ((l1 - l2) ** 2 + (l1 - l3) ** 2 + (l2 - l3) ** 2)
    kappa = 2.0 * math.sqrt(max(spread, 0.0)) / (geom.cable_pitch_mm * total)
    beta = kappa * length
    if beta < _STRAIGHT_BEND_RAD:
        return ConfigState(0.0, 0.0, length)
    alpha = math.atan2((l2 - l1) + (l3 - l1), _SQRT3 * (l2 - l3))
    return ConfigState(wrap_angle(alpha), beta, length)


def _arc_scalars(beta_rad: float) -> tuple[float, float]:
    """Return ((1 - cos b)/b, sin(b)/b), series-stable near b = 0."""
    if abs(beta_rad) < _SERIES_BEND_RAD:
        b2 = beta_rad * beta_rad
        radial = 0.5 * beta_rad * (1.0 - b2 / 12.0 * (1.0 - b2 / 30.0))
        axial = 1.0 - b2 / 6.0 * (1.0 - b2 / 20.0)
        return radial, axial
    return (1.0 - math.cos(beta_rad)) / beta_rad, math.sin(beta_rad) / beta_rad


def _rot_z(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _pose_raw(
    alpha_rad: float, beta_rad: float, length_mm: float, tip_offset_mm: float
) -> tuple[np.ndarray, np.ndarray]:
    """Unvalidated smooth pose map, usable for finite differences."""
    radial, axial = _arc_scalars(beta_rad)
    arc_end = np.array(
        [
            length_mm * radial * math.cos(alpha_rad),
            length_mm * radial * math.sin(alpha_rad),
            length_mm * axial,
        ]
    )
    rot = _rot_z(alpha_rad) @ _rot_y(beta_rad) @ _rot_z(-alpha_rad)
    position = arc_end + rot @ np.array([0.0, 0.0, tip_offset_mm])
    return position, rot


def config_to_tip(q: ConfigState, geom: WristGeometry) -> TipPose:
    """Tool-point pose of configuration ``q`` in the wrist base frame."""
    check_config(q, geom)
    position, rot = _pose_raw(q.alpha_rad, q.beta_rad, q.length_mm, geom.tip_offset_mm)
    return TipPose(position, rot)


def arc_endpoint(q: ConfigState, geom: WristGeometry) -> np.ndarray:
    """Centerline endpoint of configuration ``q`` (no tool extension), mm."""
    check_config(q, geom)
    position, _ = _pose_raw(q.alpha_rad, q.beta_rad, q.length_mm, 0.0)
    return position


def _config_from_point(x_mm: float, y_mm: float, z_mm: float) -> tuple[float, float, float]:
    """Geometric inverse for a centerline endpoint, no range enforcement.

    beta = 2*atan2(rho, z) and the chord/arc relation l = beta * c / (2 sin(beta/2)).
    """
    rho = math.hypot(x_mm, y_mm)
    if rho < 1e-12:
        return 0.0, 0.0, z_mm
    alpha = math.atan2(y_mm, x_mm)
    beta = 2.0 * math.atan2(rho, z_mm)
    chord = math.hypot(rho, z_mm)
    if beta < _SERIES_BEND_RAD:
        # l = c * (b/2) / sin(b/2) via the x/sin(x) series
        h2 = 0.25 * beta * beta
        length = chord * (1.0 + h2 / 6.0 * (1.0 + 7.0 * h2 / 60.0))
    else:
        length = beta * chord / (2.0 * math.sin(0.5 * beta))
    return wrap_angle(alpha), beta, length


def tip_to_config(target_mm: np.ndarray, geom: WristGeometry) -> ConfigState:
    """Configuration whose centerline endpoint reaches ``target_mm``.

    The target is the arc endpoint, not the tool point; use
    tip_target_to_config for targets expressed at the tool point.
    Raises InvalidTargetError for z <= 0 and UnreachableError when the
    solved bend or arc length leaves its limits.
    """
    x, y, z = float(target_mm[0]), float(target_mm[1]), float(target_mm[2])
    if z <= 0.0:
        raise InvalidTargetError(f"target depth z = {z:.6g} mm must be positive")
    alpha, beta, length = _config_from_point(x, y, z)
    if beta > geom.max_bend_rad + _LIMIT_SLACK:
        raise UnreachableError(
            f"required bend {beta:.6g} rad exceeds {geom.max_bend_rad:.6g} rad"
        )
    if (
        length < geom.cable_min_mm - _LIMIT_SLACK
        or length > geom.cable_max_mm + _LIMIT_SLACK
    ):
        raise UnreachableError(
            f"required arc length {length:.6g} mm outside "
            f"[{geom.cable_min_mm:g}, {geom.cable_max_mm:g}] mm"
        )
    beta = min(beta, geom.max_bend_rad)
    length = min(max(length, geom.cable_min_mm), geom.cable_max_mm)
    return ConfigState(alpha, beta, length)


def tip_target_to_config(
    tip_target_mm: np.ndarray,
    geom: WristGeometry,
    max_iter: int = 5,
    tol_mm: float = 1e-6,
) -> ConfigState:
    """Configuration placing the tool point at ``tip_target_mm``.

    Reduces to a scalar equation for the bend: the tool axis tilts by the
    bend angle, so subtracting the tilted tool extension must reproduce the
    same bend from the centerline point.  Solved by a safeguarded Newton
    correction, at most ``max_iter`` passes, converging below ``tol_mm``.
    A plain re-substitution of the orientation estimate is not used because
    its error gain is about 2 * tip_offset / depth > 1 here and it diverges.
    """
    target = np.asarray(tip_target_mm, dtype=float)
    x, y, z = float(target[0]), float(target[1]), float(target[2])
    rho = math.hypot(x, y)
    tool = geom.tip_offset_mm
    if rho < 1e-12:
        return tip_to_config(np.array([0.0, 0.0, z - tool]), geom)
    # bend residual: reported bend of the centerline point minus assumed bend
    def residual(bend: float) -> float:
        rho_c = rho - tool * math.sin(bend)
        z_c = z - tool * math.cos(bend)
        return 2.0 * math.atan2(rho_c, z_c) - bend

    beta = min(max(2.0 * math.atan2(rho, z), 0.0), geom.max_bend_rad)
    for _ in range(max_iter):
        r = residual(beta)
        if abs(r) < 1e-12:
            break
        h = 1e-7
        slope = (residual(beta + h) - residual(beta - h)) / (2.0 * h)
        step = -r / slope if abs(slope) > 1e-9 else r
        beta = min(max(beta + step, 0.0), geom.max_bend_rad * 1.5)

    center = np.array(
        [
            (rho - tool * math.sin(beta)) * x / rho,
            (rho - tool * math.sin(beta)) * y / rho,
            z - tool * math.cos(beta),
        ]
    )
    q = tip_to_config(center, geom)
    reached = config_to_tip(q, geom).position_mm
    if float(np.linalg.norm(reached - target)) > tol_mm:
        raise UnreachableError(
            f"tool-point target {np.round(target, 3)} not reached within {tol_mm} mm"
        )
    return q


def numeric_jacobian(q: ConfigState, geom: WristGeometry, step: float = 1e-4) -> np.ndarray:
    """Central-difference Jacobian of the tool-point position wrt (alpha, beta, l).

    Columns are d(position)/d(alpha), d(beta), d(l).  The underlying map is
    smooth through beta = 0, so the stencil may momentarily evaluate a
    negative bend.
    """
    check_config(q, geom)
    base = [q.alpha_rad, q.beta_rad, q.length_mm]
    columns = []
    for i in range(3):
        hi = list(base)
        lo = list(base)
        hi[i] += step
        lo[i] -= step
        p_hi, _ = _pose_raw(hi[0], hi[1], hi[2], geom.tip_offset_mm)
        p_lo, _ = _pose_raw(lo[0], lo[1], lo[2], geom.tip_offset_mm)
        columns.append((p_hi - p_lo) / (2.0 * step))
    return np.column_stack(columns)


# Reference travel of a healthy human wrist along its six anatomical
# directions, mm.  Printed next to sampled extents so the reachable
# envelope can be judged against the hand it stands in for.
HUMAN_WRIST_TRAVEL_MM = {
    "pronation": 75.8,
    "supination": 82.1,
    "flexion": 76.4,
    "extension": 74.9,
    "radial": 21.5,
    "ulnar": 36.0,
}


def workspace_sample(
    geom: WristGeometry,
    n_alpha: int = 24,
    n_beta: int = 21,
    n_length: int = 9,
) -> tuple[np.ndarray, dict[str, tuple[float, float]]]:
    """Sample reachable tool-point positions over a configuration grid.

    A grid point is kept only when the cables stay inside their travel at
    both its azimuth and the opposite azimuth, so the returned point set is
    exactly symmetric under alpha -> alpha + pi (x, y negated).  ``n_alpha``
    must be even for the same reason.  Returns (points, extents) where
    extents maps axis name to (min, max) in mm.
    """
    if n_alpha % 2 != 0:
        raise ValueError("n_alpha must be even to keep the sample mirror-symmetric")
    alphas = [wrap_angle(-math.pi + 2.0 * math.pi * k / n_alpha) for k in range(n_alpha)]
    betas = np.linspace(0.0, geom.max_bend_rad, n_beta)
    lengths = np.linspace(geom.cable_min_mm, geom.cable_max_mm, n_length)
    points = []
    for beta in betas:
        for length in lengths:
            if beta < _STRAIGHT_BEND_RAD:
                q = ConfigState(0.0, 0.0, float(length))
                try:
                    config_to_actuator(q, geom)
                except OutOfRangeError:
                    continue
                points.append(config_to_tip(q, geom).position_mm)
                continue
            for alpha in alphas:
                q = ConfigState(alpha, float(beta), float(length))
                mirror = ConfigState(wrap_angle(alpha + math.pi), float(beta), float(length))
                try:
                    config_to_actuator(q, geom)
                    config_to_actuator(mirror, geom)
                except OutOfRangeError:
                    continue
                points.append(config_to_tip(q, geom).position_mm)
    cloud = np.array(points)
    extents = {
        axis: (float(cloud[:, i].min()), float(cloud[:, i].max()))
        for i, axis in enumerate(("x", "y", "z"))
    }
    return cloud, extents
