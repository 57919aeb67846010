"""Deterministic session replay from step-by-step input scripts.

A script is comma-separated text, one row per control period, with header

    event,dx_mm,dy_mm,dz_mm,jog_joint,jog_target,setting,value

All cells may be empty (an idle period).  ``event`` is a session event
(start, pedal, advance, trigger, lock, abort); dx/dy/dz form a master-side
displacement; jog_joint/jog_target queue a platform move; setting/value
apply one of ``pressure_kpa``, ``vf_diameter_mm`` (the operator dials a
diameter; the constraint stores the radius) or ``k_scale``.  Replays are
pure functions of (config, script): identical inputs give identical traces.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .config import RunConfig
from .errors import ScriptError
from .phantom import evaluate_success, max_normal_force
from .protocol import SequenceSource, WireMessage
from .stiffness import effective_stiffness, wrist_stiffness
from .teleop import (
    CONTROL_DT_S,
    EVENTS,
    JogCommand,
    SessionState,
    StepInput,
    control_step,
    new_session,
    record_state,
    set_pressure,
    set_scale,
    set_vf_radius,
)

SCRIPT_HEADER = (
    "event",
    "dx_mm",
    "dy_mm",
    "dz_mm",
    "jog_joint",
    "jog_target",
    "setting",
    "value",
)

SETTINGS = ("pressure_kpa", "vf_diameter_mm", "k_scale")


@dataclass(frozen=True)
class StepCommand:
    """Input for one control period of a replayed session."""

    event: str | None = None
    delta_mm: tuple[float, float, float] | None = None
    jog: JogCommand | None = None
    setting: tuple[str, float] | None = None

    def action_count(self) -> int:
        return sum(
            1
            for v in (self.event, self.delta_mm, self.jog, self.setting)
            if v is not None
        )


IDLE = StepCommand()


@dataclass(frozen=True)
class ReplayReport:
    """Verdict over a finished replay trace."""

    rows: int
    success: bool
    dwell_s: float
    max_normal_force_n: float


def session_from_config(config: RunConfig) -> SessionState:
    return new_session(
        geom=config.geom,
        calibration=config.calibration,
        swab=config.swab,
        mapping=config.mapping,
        gains=config.gains,
        pressure_kpa=config.pressure_kpa,
        vf_radius_mm=config.vf_radius_mm,
    )


def apply_setting(session: SessionState, name: str, value: float) -> None:
    """Apply one named setting to a session; shared by replay and the wire."""
    if name == "pressure_kpa":
        set_pressure(session, value)
    elif name == "vf_diameter_mm":
        set_vf_radius(session, value / 2.0)
    elif name == "k_scale":
        set_scale(session, value)
    else:
        raise ScriptError(f"unknown setting {name!r}; known: {', '.join(SETTINGS)}")


def apply_step(session: SessionState, command: StepCommand) -> SessionState:
    """Run one control period under a script row."""
    if command.setting is not None:
        apply_setting(session, *command.setting)
    return control_step(
        session,
        StepInput(
            master_delta_mm=command.delta_mm,
            event=command.event,
            jog=command.jog,
        ),
    )


def run_script(session: SessionState, script: Sequence[StepCommand]) -> SessionState:
    record_state(session)
    for command in script:
        apply_step(session, command)
    return session


def run_replay(
    config: RunConfig, script: Sequence[StepCommand]
) -> tuple[SessionState, ReplayReport]:
    """Replay a script against a fresh session and judge the trace."""
    session = run_script(session_from_config(config), script)
    k_eff = effective_stiffness(
        wrist_stiffness(session.calibration, session.pressure), session.swab
    )
    verdict = evaluate_success(
        session.trace, config.phantom, k_eff, session.swab.length_mm
    )
    peak = max_normal_force(session.trace, config.phantom, k_eff, session.swab.length_mm)
    return session, ReplayReport(
        rows=len(session.trace),
        success=verdict.success,
        dwell_s=verdict.dwell_s,
        max_normal_force_n=peak,
    )


# ------------------------------------------------------------ script files


def _parse_row(rec: list[str], lineno: int) -> StepCommand:
    cells = [c.strip() for c in rec] + [""] * (len(SCRIPT_HEADER) - len(rec))
    if len(cells) > len(SCRIPT_HEADER):
        raise ScriptError(f"line {lineno}: {len(cells)} columns, expected 8")
    event, dx, dy, dz, joint, target, setting, value = cells

    parsed_event = None
    if event:
        if event not in EVENTS:
            raise ScriptError(
                f"line {lineno}: unknown event {event!r}; known: {', '.join(EVENTS)}"
            )
        parsed_event = event

    delta = None
    if dx or dy or dz:
        if not (dx and dy and dz):
            raise ScriptError(f"line {lineno}: dx/dy/dz must be given together")
        try:
            delta = (float(dx), float(dy), float(dz))
        except ValueError as exc:
            raise ScriptError(f"line {lineno}: bad delta: {exc}") from exc

    jog = None
    if joint or target:
        if not (joint and target):
            raise ScriptError(f"line {lineno}: jog needs both joint and target")
        try:
            jog = JogCommand(joint, float(target))
        except ValueError as exc:
            raise ScriptError(f"line {lineno}: bad jog target: {exc}") from exc

    parsed_setting = None
    if setting or value:
        if not (setting and value):
            raise ScriptError(f"line {lineno}: setting needs both name and value")
        if setting not in SETTINGS:
            raise ScriptError(
                f"line {lineno}: unknown setting {setting!r}; known: {', '.join(SETTINGS)}"
            )
        try:
            parsed_setting = (setting, float(value))
        except ValueError as exc:
            raise ScriptError(f"line {lineno}: bad setting value: {exc}") from exc

    return StepCommand(parsed_event, delta, jog, parsed_setting)


def load_script(path: str | Path) -> list[StepCommand]:
    """Read a script file; malformed rows report their line number."""
    steps: list[StepCommand] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SCRIPT_HEADER:
            raise ScriptError(
                f"script {path} must start with header {','.join(SCRIPT_HEADER)}"
            )
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            steps.append(_parse_row(rec, lineno))
    return steps


def save_script(script: Iterable[StepCommand], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SCRIPT_HEADER)
        for command in script:
            dx, dy, dz = (
                (repr(command.delta_mm[0]), repr(command.delta_mm[1]), repr(command.delta_mm[2]))
                if command.delta_mm is not None
                else ("", "", "")
            )
            joint, target = (
                (command.jog.joint, repr(command.jog.target))
                if command.jog is not None
                else ("", "")
            )
            setting, value = (
                (command.setting[0], repr(command.setting[1]))
                if command.setting is not None
                else ("", "")
            )
            writer.writerow(
                [command.event or "", dx, dy, dz, joint, target, setting, value]
            )


# ------------------------------------------------------------- wire bridge


def as_wire_messages(script: Sequence[StepCommand]) -> list[WireMessage]:
    """Translate a script into protocol frames for a lockstep-mode service.

    Row i runs in control period i+1, so each frame is stamped with that
    period's end time; idle rows send nothing and the service fills the gap
    from the next frame's timestamp.  Rows must carry at most one action to
    stay one-to-one with frames.
    """
    seqs = SequenceSource()
    frames: list[WireMessage] = []
    for index, command in enumerate(script):
        if command.action_count() == 0:
            continue
        if command.action_count() > 1:
            raise ScriptError(
                f"row {index} carries {command.action_count()} actions; "
                "wire replay needs one per row"
            )
        t_ms = (index + 1) * CONTROL_DT_S * 1000.0
        if command.event is not None:
            if command.event in ("trigger", "pedal"):
                frames.append(WireMessage(command.event, seqs.take(), t_ms))
            else:
                frames.append(
                    WireMessage(
                        "phase_event", seqs.take(), t_ms, {"event": command.event}
                    )
                )
        elif command.delta_mm is not None:
            dx, dy, dz = command.delta_mm
            frames.append(
                WireMessage(
                    "master_delta",
                    seqs.take(),
                    t_ms,
                    {"dx_mm": dx, "dy_mm": dy, "dz_mm": dz},
                )
            )
        elif command.jog is not None:
            frames.append(
                WireMessage(
                    "jog",
                    seqs.take(),
                    t_ms,
                    {"joint": command.jog.joint, "target": command.jog.target},
                )
            )
        else:
            name, value = command.setting
            kind = {
                "pressure_kpa": "set_pressure",
                "vf_diameter_mm": "set_vf_radius",
                "k_scale": "set_scale",
            }[name]
            field = {
                "set_pressure": "pressure_kpa",
                "set_vf_radius": "diameter_mm",
                "set_scale": "k_scale",
            }[kind]
            frames.append(WireMessage(kind, seqs.take(), t_ms, {field: value}))
    return frames


# ----------------------------------------------------------- canned scripts


def _preamble(rng: random.Random | None = None) -> list[StepCommand]:
    """Mount a swab and close the gripper: start .. LockedHome."""
    pick = rng.randint if rng else (lambda a, b: a)
    steps = [StepCommand(event="start")]
    steps += [IDLE] * pick(8, 12)  # gripper needs 0.3 s between moves
    steps += [StepCommand(event="pedal")]
    steps += [IDLE] * pick(8, 12)
    return steps


def _insertion(depth_mm: float = 40.0, slack: int = 2) -> list[StepCommand]:
    """Advance to insertion and run J1 to depth (10 mm/s, 40 ms periods)."""
    travel = [StepCommand(event="advance"), StepCommand(jog=JogCommand("j1", depth_mm))]
    settle = int(depth_mm / 10.0 / CONTROL_DT_S) + slack
    return travel + [IDLE] * settle


def overdrive_script(vf_on: bool = True, pushes: int = 80) -> list[StepCommand]:
    """Drive the master hard into the throat plane.

    With the fixture left on, insertion clamps at the stiffness bound; with
    it suspended (a second trigger), the wrist runs to its cable envelope
    and the simulated contact force rises far beyond comfort.
    """
    steps = _preamble() + _insertion()
    steps += [StepCommand(event="trigger")]
    if not vf_on:
        steps += [StepCommand(event="trigger")]
    steps += [StepCommand(delta_mm=(0.0, 0.0, -1.0))] * pushes
    return steps


def sampling_script(seed: int) -> list[StepCommand]:
    """One randomized full sampling procedure that ends collected.

    Randomness (seeded, deterministic): chamber pressure, constraint
    diameter, settling margins, push count and a gentle on-patch wiggle.
    """
    rng = random.Random(seed)
    steps: list[StepCommand] = [
        StepCommand(setting=("pressure_kpa", float(rng.choice((0.0, 30.0, 60.0, 90.0))))),
        StepCommand(setting=("vf_diameter_mm", round(rng.uniform(24.0, 50.0), 3))),
    ]
    steps += _preamble(rng)
    steps += _insertion(slack=rng.randint(2, 6))
    steps += [StepCommand(event="trigger")]
    for _ in range(rng.randint(35, 55)):
        steps.append(StepCommand(delta_mm=(0.0, 0.0, -1.0)))
    for _ in range(rng.randint(5, 10)):
        dx = round(rng.uniform(-0.8, 0.8), 3)
        dy = round(rng.uniform(-0.8, 0.8), 3)
        steps.append(StepCommand(delta_mm=(dx, dy, 0.0)))
    steps += [StepCommand(event="lock")]
    steps += [StepCommand(event="advance"), StepCommand(jog=JogCommand("j1", 0.0))]
    steps += [IDLE] * (int(40.0 / 10.0 / CONTROL_DT_S) + 2)
    steps += [StepCommand(event="pedal")]
    steps += [IDLE] * rng.randint(8, 12)
    steps += [StepCommand(event="advance")]
    return steps
