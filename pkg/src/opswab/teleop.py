"""Teleoperated sampling session runtime.

Owns the 25 Hz control loop around one sampling procedure: the session
state machine (preparation, swab mounting, locked approach, insertion,
teleoperated sampling, homing, withdrawal, collection), the RCM platform
joints with rate-limited point-to-point jogs, the pneumatic gripper, the
master-to-slave motion pipeline (scale and axis map, virtual fixture
projection, inverse kinematics, actuator envelope saturation), and the
per-step state trace.

Single-writer model: exactly one owner calls the mutating operations;
observers consume the trace or ``snapshot`` dictionaries.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    IllegalTransitionError,
    OutOfRangeError,
    PhaseViolationError,
)
from .fixture import (
    FixtureSpec,
    HapticGains,
    master_force,
    motion_force,
    project,
    stiffness_force,
)
from .kinematics import (
    ConfigState,
    WristGeometry,
    arc_endpoint,
    config_to_actuator,
    config_to_tip,
    numeric_jacobian,
)
from .mapping import MasterMapping, map_master_delta
from .stiffness import (
    CalibrationTable,
    PressureSetting,
    SwabSpec,
    default_calibration,
    default_swabs,
    effective_stiffness,
    wrist_stiffness,
)

CONTROL_DT_S = 0.04
J1_RATE_MM_PER_S = 10.0
J23_RATE_DEG_PER_S = 10.0
GRIPPER_DWELL_S = 0.3
DEFAULT_VF_RADIUS_MM = 15.0

J1_RANGE_MM = (0.0, 100.0)
J2_RANGE_DEG = (0.0, 47.0)
J3_RANGE_DEG = (0.0, 360.0)  # half-open: 360 itself is not a valid position

TRACE_HEADER = (
    "t_s",
    "phase",
    "x_mm",
    "y_mm",
    "z_mm",
    "alpha",
    "beta",
    "l_mm",
    "fx_n",
    "fy_n",
    "fz_n",
    "vf_active",
)


class Phase(Enum):
    PREPARE = "Prepare"
    SWAB_MOUNT = "SwabMount"
    LOCKED_HOME = "LockedHome"
    INSERTION_AND_VF_SELECT = "InsertionAndVfSelect"
    TELEOP_SAMPLING = "TeleopSampling"
    LOCK_AND_HOME = "LockAndHome"
    WITHDRAW = "Withdraw"
    SWAB_COLLECT = "SwabCollect"
    DONE = "Done"


EVENTS = ("start", "pedal", "advance", "trigger", "lock", "abort")

# forward procedure order; abort reaches LOCK_AND_HOME from anywhere
_TRANSITIONS: dict[tuple[Phase, str], Phase] = {
    (Phase.PREPARE, "start"): Phase.SWAB_MOUNT,
    (Phase.SWAB_MOUNT, "pedal"): Phase.LOCKED_HOME,
    (Phase.LOCKED_HOME, "advance"): Phase.INSERTION_AND_VF_SELECT,
    (Phase.INSERTION_AND_VF_SELECT, "trigger"): Phase.TELEOP_SAMPLING,
    (Phase.TELEOP_SAMPLING, "lock"): Phase.LOCK_AND_HOME,
    (Phase.LOCK_AND_HOME, "advance"): Phase.WITHDRAW,
    (Phase.WITHDRAW, "pedal"): Phase.SWAB_COLLECT,
    (Phase.SWAB_COLLECT, "advance"): Phase.DONE,
}

# phases in which pressure may still be adjusted
_PRESSURE_PHASES = frozenset(
    {Phase.PREPARE, Phase.SWAB_MOUNT, Phase.LOCKED_HOME}
)
# phases preceding the fixture anchor, where console settings may change
_SETUP_PHASES = _PRESSURE_PHASES | {Phase.INSERTION_AND_VF_SELECT}

_J1_JOG_PHASES = frozenset({Phase.INSERTION_AND_VF_SELECT, Phase.WITHDRAW})
_J23_JOG_PHASES = _PRESSURE_PHASES


@dataclass
class RcmState:
    """Positioning platform joints: insertion slide plus two setup angles."""

    j1_mm: float = 0.0
    j2_deg: float = 0.0
    j3_deg: float = 0.0
    locks: dict[str, bool] = field(
        default_factory=lambda: {"j1": True, "j2": False, "j3": False}
    )


@dataclass
class GripperState:
    """Binary pneumatic gripper; starts closed."""

    state: str = "closed"
    # logical time until which the pneumatic transition is still settling
    busy_until_s: float = -1.0

    @property
    def pressure_sign(self) -> str:
        return "negative" if self.state == "open" else "positive"


@dataclass(frozen=True)
class JogCommand:
    """Point-to-point target for one RCM joint ("j1", "j2" or "j3")."""

    joint: str
    target: float


@dataclass(frozen=True)
class StepInput:
    """Operator input consumed by one control step."""

    master_delta_mm: np.ndarray | None = None
    event: str | None = None
    jog: JogCommand | None = None


@dataclass(frozen=True)
class TraceRow:
    t_s: float
    phase: str
    x_mm: float
    y_mm: float
    z_mm: float
    alpha_rad: float
    beta_rad: float
    l_mm: float
    fx_n: float
    fy_n: float
    fz_n: float
    vf_active: bool


@dataclass
class SessionState:
    """Everything one sampling session owns, mutated only by this module."""

    geom: WristGeometry
    calibration: CalibrationTable
    swab: SwabSpec
    mapping: MasterMapping
    gains: HapticGains
    fixture: FixtureSpec
    phase: Phase = Phase.PREPARE
    rcm: RcmState = field(default_factory=RcmState)
    wrist_q: ConfigState = field(default_factory=lambda: ConfigState(0.0, 0.0, 65.0))
    gripper: GripperState = field(default_factory=GripperState)
    pressure: PressureSetting = PressureSetting(0.0)
    vf_radius_mm: float = DEFAULT_VF_RADIUS_MM
    trace: list[TraceRow] = field(default_factory=list)
    t_s: float = 0.0
    step_index: int = 0
    # operator's accumulated raw target, fixture frame
    target_mm: np.ndarray = field(default_factory=lambda: np.zeros(3))
    last_master_force_n: np.ndarray = field(default_factory=lambda: np.zeros(3))
    jog_targets: dict[str, float] = field(default_factory=dict)


def new_session(
    geom: WristGeometry | None = None,
    calibration: CalibrationTable | None = None,
    swab: SwabSpec | str = "wood",
    mapping: MasterMapping | None = None,
    gains: HapticGains | None = None,
    pressure_kpa: float = 0.0,
    vf_radius_mm: float = DEFAULT_VF_RADIUS_MM,
) -> SessionState:
    """Build a session at rest: straight wrist, gripper closed, Prepare."""
    geom = geom or WristGeometry()
    calibration = calibration or default_calibration()
    if isinstance(swab, str):
        swab = default_swabs()[swab]
    session = SessionState(
        geom=geom,
        calibration=calibration,
        swab=swab,
        mapping=mapping or MasterMapping(),
        gains=gains or HapticGains(),
        fixture=_resting_fixture(geom, calibration, swab, pressure_kpa, vf_radius_mm),
        pressure=PressureSetting(pressure_kpa),
        vf_radius_mm=vf_radius_mm,
        wrist_q=ConfigState(0.0, 0.0, geom.rest_length_mm),
    )
    session.rcm.locks = _locks_for(session.phase)
    return session


def _resting_fixture(
    geom: WristGeometry,
    calibration: CalibrationTable,
    swab: SwabSpec,
    pressure_kpa: float,
    vf_radius_mm: float,
) -> FixtureSpec:
    home = ConfigState(0.0, 0.0, geom.rest_length_mm)
    return FixtureSpec(
        origin_mm=arc_endpoint(home, geom),
        r_throat_mm=vf_radius_mm,
        l_button_mm=geom.rest_length_mm,
        k_axial_effective_n_per_mm=_effective_axial(calibration, swab, pressure_kpa),
        enabled=False,
    )


def _effective_axial(
    calibration: CalibrationTable, swab: SwabSpec, pressure_kpa: float | PressureSetting
) -> float:
    wrist = wrist_stiffness(calibration, pressure_kpa)
    return effective_stiffness(wrist, swab).axial_n_per_mm


def _locks_for(phase: Phase) -> dict[str, bool]:
    return {
        "j1": phase not in _J1_JOG_PHASES,
        "j2": phase not in _J23_JOG_PHASES,
        "j3": phase not in _J23_JOG_PHASES,
    }


def _home_wrist(session: SessionState) -> None:
    session.wrist_q = ConfigState(0.0, 0.0, session.geom.rest_length_mm)
    session.fixture = replace(session.fixture, enabled=False)
    session.target_mm = np.zeros(3)
    session.last_master_force_n = np.zeros(3)


def _flip_gripper(session: SessionState, state: str) -> None:
    if session.t_s < session.gripper.busy_until_s:
        raise IllegalTransitionError(
            f"gripper still settling until t={session.gripper.busy_until_s:g} s"
        )
    if session.gripper.state != state:
        session.gripper = GripperState(
            state=state, busy_until_s=session.t_s + GRIPPER_DWELL_S
        )


def fsm_advance(session: SessionState, event: str) -> SessionState:
    """Apply one operator event to the session state machine.

    Raises IllegalTransitionError for events that do not apply to the
    current phase, or when the gripper is still settling from its last
    transition.  ``abort`` homes the wrist and reaches LockAndHome from
    any phase.
    """
    if event not in EVENTS:
        raise IllegalTransitionError(f"unknown event {event!r}")

    if event == "abort":
        _home_wrist(session)
        session.phase = Phase.LOCK_AND_HOME
        session.jog_targets.clear()
        session.rcm.locks = _locks_for(session.phase)
        return session

    if session.phase is Phase.TELEOP_SAMPLING and event == "trigger":
        # safety switch: suspend or resume the fixture, keeping its anchor
        session.fixture = replace(session.fixture, enabled=not session.fixture.enabled)
        return session

    nxt = _TRANSITIONS.get((session.phase, event))
    if nxt is None:
        raise IllegalTransitionError(
            f"event {event!r} is not legal in phase {session.phase.value}"
        )

    # validate side effects before mutating anything
    if nxt in (Phase.SWAB_MOUNT, Phase.SWAB_COLLECT):
        _flip_gripper(session, "open")
    elif nxt is Phase.LOCKED_HOME:
        _flip_gripper(session, "closed")
    elif nxt is Phase.TELEOP_SAMPLING:
        if session.gripper.state != "closed":
            raise IllegalTransitionError("sampling requires a closed gripper")
        session.fixture = FixtureSpec(
            origin_mm=arc_endpoint(session.wrist_q, session.geom),
            r_throat_mm=session.vf_radius_mm,
            l_button_mm=session.wrist_q.length_mm,
            k_axial_effective_n_per_mm=_effective_axial(
                session.calibration, session.swab, session.pressure
            ),
            enabled=True,
        )
        session.target_mm = np.zeros(3)
    elif nxt is Phase.LOCK_AND_HOME:
        _home_wrist(session)

    session.phase = nxt
    session.jog_targets.clear()
    session.rcm.locks = _locks_for(nxt)
    return session


def set_pressure(
    session: SessionState, pressure: float | PressureSetting
) -> SessionState:
    """Store a chamber pressure and refresh the fixture's effective stiffness.

    Legal only before insertion (the stiffness is pre-adjusted, not varied
    mid-procedure).
    """
    if session.phase not in _PRESSURE_PHASES:
        raise PhaseViolationError(
            f"pressure can not change during {session.phase.value}"
        )
    setting = (
        pressure
        if isinstance(pressure, PressureSetting)
        else PressureSetting(float(pressure))
    )
    session.pressure = setting
    session.fixture = replace(
        session.fixture,
        k_axial_effective_n_per_mm=_effective_axial(
            session.calibration, session.swab, setting
        ),
    )
    return session


def set_vf_radius(session: SessionState, r_throat_mm: float) -> SessionState:
    """Select the throat constraint radius; legal until the fixture anchors."""
    if session.phase not in _SETUP_PHASES:
        raise PhaseViolationError("fixture radius is fixed once sampling starts")
    session.fixture = replace(session.fixture, r_throat_mm=float(r_throat_mm))
    session.vf_radius_mm = float(r_throat_mm)
    return session


def set_scale(session: SessionState, k_scale: float) -> SessionState:
    """Select the master motion scale; legal until the fixture anchors."""
    if session.phase not in _SETUP_PHASES:
        raise PhaseViolationError("motion scale is fixed once sampling starts")
    session.mapping = MasterMapping(
        k_scale=float(k_scale), axis_map=session.mapping.axis_map
    )
    return session


def submit_jog(session: SessionState, jog: JogCommand) -> None:
    """Queue a rate-limited point-to-point move for one platform joint."""
    ranges = {"j1": J1_RANGE_MM, "j2": J2_RANGE_DEG, "j3": J3_RANGE_DEG}
    if jog.joint not in ranges:
        raise OutOfRangeError(f"unknown joint {jog.joint!r}")
    if session.rcm.locks[jog.joint]:
        raise PhaseViolationError(
            f"joint {jog.joint} is locked in phase {session.phase.value}"
        )
    lo, hi = ranges[jog.joint]
    target = min(max(float(jog.target), lo), hi)
    if jog.joint == "j3":
        target = min(target, math.nextafter(J3_RANGE_DEG[1], 0.0))
    session.jog_targets[jog.joint] = target


def _advance_joints(session: SessionState, dt: float) -> None:
    rates = {
        "j1": J1_RATE_MM_PER_S,
        "j2": J23_RATE_DEG_PER_S,
        "j3": J23_RATE_DEG_PER_S,
    }
    attrs = {"j1": "j1_mm", "j2": "j2_deg", "j3": "j3_deg"}
    done = []
    for joint, target in session.jog_targets.items():
        current = getattr(session.rcm, attrs[joint])
        step = rates[joint] * dt
        if abs(target - current) <= step:
            setattr(session.rcm, attrs[joint], target)
            done.append(joint)
        else:
            setattr(
                session.rcm, attrs[joint], current + math.copysign(step, target - current)
            )
    for joint in done:
        del session.jog_targets[joint]


def control_step(
    session: SessionState, inputs: StepInput | None = None, dt: float = CONTROL_DT_S
) -> SessionState:
    """Run one control period: inputs, motion, joints, time, trace.

    Events are applied first (so an input may transition and then act),
    then jog submissions, then the master delta pipeline: map, accumulate,
    project through the fixture, inverse kinematics, actuator envelope
    saturation (a command whose cables leave their travel holds the last
    valid configuration).  Master deltas are legal only during sampling;
    the constraint force echo persists between deltas.  Timestamps are
    logical multiples of dt.
    """
    if dt <= 0.0:
        raise OutOfRangeError("dt must be positive")
    inputs = inputs or StepInput()

    if inputs.event is not None:
        fsm_advance(session, inputs.event)
    if inputs.jog is not None:
        submit_jog(session, inputs.jog)

    if inputs.master_delta_mm is not None:
        if session.phase is not Phase.TELEOP_SAMPLING:
            raise PhaseViolationError(
                f"master deltas are not accepted in phase {session.phase.value}"
            )
        delta_s = map_master_delta(
            np.asarray(inputs.master_delta_mm, dtype=float), session.mapping
        )
        session.target_mm = session.target_mm + delta_s
        result = project(session.target_mm, session.fixture, session.wrist_q, session.geom)
        if result.command_config is not None:
            try:
                config_to_actuator(result.command_config, session.geom)
                session.wrist_q = result.command_config
            except OutOfRangeError:
                pass  # cable travel exhausted: motors saturate, posture holds
        force = master_force(
            motion_force(result.motion_violation_mm, session.gains),
            stiffness_force(result.stiffness_violation, session.gains),
            numeric_jacobian(session.wrist_q, session.geom),
            session.mapping,
        )
        session.last_master_force_n = force.master_force_n

    _advance_joints(session, dt)

    session.step_index += 1
    session.t_s = session.step_index * dt
    session.trace.append(_trace_row(session))
    return session


def _trace_row(session: SessionState) -> TraceRow:
    tip = config_to_tip(session.wrist_q, session.geom).position_mm
    f = session.last_master_force_n
    return TraceRow(
        t_s=session.t_s,
        phase=session.phase.value,
        x_mm=float(tip[0]),
        y_mm=float(tip[1]),
        z_mm=float(tip[2]) + session.rcm.j1_mm,
        alpha_rad=session.wrist_q.alpha_rad,
        beta_rad=session.wrist_q.beta_rad,
        l_mm=session.wrist_q.length_mm,
        fx_n=float(f[0]),
        fy_n=float(f[1]),
        fz_n=float(f[2]),
        vf_active=session.fixture.enabled,
    )


def snapshot(session: SessionState) -> dict:
    """Immutable plain-data view of the session for observers and the wire."""
    tip = config_to_tip(session.wrist_q, session.geom).position_mm
    return {
        "t_s": session.t_s,
        "step": session.step_index,
        "phase": session.phase.value,
        "wrist": {
            "alpha_rad": session.wrist_q.alpha_rad,
            "beta_rad": session.wrist_q.beta_rad,
            "length_mm": session.wrist_q.length_mm,
        },
        "tip_scene_mm": [
            float(tip[0]),
            float(tip[1]),
            float(tip[2]) + session.rcm.j1_mm,
        ],
        "rcm": {
            "j1_mm": session.rcm.j1_mm,
            "j2_deg": session.rcm.j2_deg,
            "j3_deg": session.rcm.j3_deg,
        },
        "gripper": session.gripper.state,
        "pressure_kpa": session.pressure.pressure_kpa,
        "fixture": {
            "enabled": session.fixture.enabled,
            "r_throat_mm": session.fixture.r_throat_mm,
            "l_button_mm": session.fixture.l_button_mm,
            "k_axial_effective_n_per_mm": session.fixture.k_axial_effective_n_per_mm,
        },
        "force_n": [float(v) for v in session.last_master_force_n],
    }


def record_state(session: SessionState) -> SessionState:
    """Append a trace row for the present instant without stepping time.

    Replay and the service use this once at session start so a trace always
    opens with the initial state.
    """
    session.trace.append(_trace_row(session))
    return session


def save_trace(trace: list[TraceRow], path: str | Path) -> None:
    """Write the trace as comma-separated text with the canonical header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for row in trace:
            writer.writerow(
                [
                    f"{row.t_s:.9g}",
                    row.phase,
                    f"{row.x_mm:.9g}",
                    f"{row.y_mm:.9g}",
                    f"{row.z_mm:.9g}",
                    f"{row.alpha_rad:.9g}",
                    f"{row.beta_rad:.9g}",
                    f"{row.l_mm:.9g}",
                    f"{row.fx_n:.9g}",
                    f"{row.fy_n:.9g}",
                    f"{row.fz_n:.9g}",
                    "1" if row.vf_active else "0",
                ]
            )


def load_trace(path: str | Path) -> list[TraceRow]:
    """Read a trace written by save_trace."""
    rows: list[TraceRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise OutOfRangeError(f"unexpected trace header {header!r}")
        for rec in reader:
            rows.append(
                TraceRow(
                    t_s=float(rec[0]),
                    phase=rec[1],
                    x_mm=float(rec[2]),
                    y_mm=float(rec[3]),
                    z_mm=float(rec[4]),
                    alpha_rad=float(rec[5]),
                    beta_rad=float(rec[6]),
                    l_mm=float(rec[7]),
                    fx_n=float(rec[8]),
                    fy_n=float(rec[9]),
                    fz_n=float(rec[10]),
                    vf_active=rec[11] == "1",
                )
            )
    return rows
