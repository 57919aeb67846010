"""Session runtime tests: FSM, gripper, jogs, pipeline, trace."""

from __future__ import annotations

import time

import numpy as np
import pytest

from opswab.errors import (
    IllegalTransitionError,
    OutOfRangeError,
    PhaseViolationError,
)
from opswab.kinematics import ConfigState, arc_endpoint, config_to_actuator
from opswab.stiffness import PressureSetting, default_calibration, wrist_stiffness
from opswab.teleop import (
    CONTROL_DT_S,
    JogCommand,
    Phase,
    SessionState,
    StepInput,
    TRACE_HEADER,
    control_step,
    fsm_advance,
    load_trace,
    new_session,
    save_trace,
    set_pressure,
    set_scale,
    set_vf_radius,
    snapshot,
)


def run_steps(session: SessionState, n: int) -> None:
    for _ in range(n):
        control_step(session)


def advance_to_sampling(session: SessionState) -> None:
    fsm_advance(session, "start")
    run_steps(session, 8)  # let the gripper settle
    fsm_advance(session, "pedal")
    run_steps(session, 8)
    fsm_advance(session, "advance")
    fsm_advance(session, "trigger")


# -------------------------------------------------------------------- FSM


def test_full_procedure_traverses_every_phase_once() -> None:
    s = new_session()
    seen = [s.phase]
    plan = ["start", "pedal", "advance", "trigger", "lock", "advance", "pedal", "advance"]
    for event in plan:
        run_steps(s, 8)
        fsm_advance(s, event)
        seen.append(s.phase)
    assert seen == [
        Phase.PREPARE,
        Phase.SWAB_MOUNT,
        Phase.LOCKED_HOME,
        Phase.INSERTION_AND_VF_SELECT,
        Phase.TELEOP_SAMPLING,
        Phase.LOCK_AND_HOME,
        Phase.WITHDRAW,
        Phase.SWAB_COLLECT,
        Phase.DONE,
    ]
    assert len(set(seen)) == len(seen)


def test_first_transition_opens_gripper() -> None:
    s = new_session()
    assert s.gripper.state == "closed"
    fsm_advance(s, "start")
    assert s.phase is Phase.SWAB_MOUNT
    assert s.gripper.state == "open"
    assert s.gripper.pressure_sign == "negative"


def test_illegal_events_rejected() -> None:
    s = new_session()
    with pytest.raises(IllegalTransitionError):
        fsm_advance(s, "pedal")
    with pytest.raises(IllegalTransitionError):
        fsm_advance(s, "lock")
    with pytest.raises(IllegalTransitionError):
        fsm_advance(s, "jump")
    assert s.phase is Phase.PREPARE


def test_lock_homes_the_wrist() -> None:
    s = new_session()
    advance_to_sampling(s)
    control_step(s, StepInput(master_delta_mm=np.array([2.0, 4.0, 6.0])))
    assert s.wrist_q.beta_rad > 0.0
    fsm_advance(s, "lock")
    assert s.phase is Phase.LOCK_AND_HOME
    assert s.wrist_q == ConfigState(0.0, 0.0, s.geom.rest_length_mm)
    assert not s.fixture.enabled


def test_abort_reaches_lock_and_home_from_anywhere() -> None:
    s = new_session()
    fsm_advance(s, "abort")
    assert s.phase is Phase.LOCK_AND_HOME

    s = new_session()
    advance_to_sampling(s)
    fsm_advance(s, "abort")
    assert s.phase is Phase.LOCK_AND_HOME
    assert not s.fixture.enabled
    assert s.wrist_q == ConfigState(0.0, 0.0, s.geom.rest_length_mm)


def test_gripper_dwell_blocks_back_to_back_flips() -> None:
    s = new_session()
    fsm_advance(s, "start")
    with pytest.raises(IllegalTransitionError):
        fsm_advance(s, "pedal")  # still settling open
    assert s.phase is Phase.SWAB_MOUNT
    run_steps(s, 8)  # 0.32 s of logical time
    fsm_advance(s, "pedal")
    assert s.phase is Phase.LOCKED_HOME
    assert s.gripper.state == "closed"
    assert s.gripper.pressure_sign == "positive"


def test_trigger_anchors_fixture_at_current_configuration() -> None:
    s = new_session()
    fsm_advance(s, "start")
    run_steps(s, 8)
    fsm_advance(s, "pedal")
    run_steps(s, 8)
    fsm_advance(s, "advance")
    bent = ConfigState(0.3, 0.4, 70.0)
    s.wrist_q = bent  # pose reached during insertion
    fsm_advance(s, "trigger")
    assert s.phase is Phase.TELEOP_SAMPLING
    assert s.fixture.enabled
    assert s.fixture.l_button_mm == 70.0
    np.testing.assert_allclose(s.fixture.origin_mm, arc_endpoint(bent, s.geom))
    assert np.all(s.target_mm == 0.0)


def test_trigger_toggles_fixture_during_sampling() -> None:
    s = new_session()
    advance_to_sampling(s)
    anchor = s.fixture.l_button_mm
    fsm_advance(s, "trigger")
    assert not s.fixture.enabled
    assert s.fixture.l_button_mm == anchor
    fsm_advance(s, "trigger")
    assert s.fixture.enabled
    assert s.phase is Phase.TELEOP_SAMPLING


# ------------------------------------------------------------ console settings


def test_set_pressure_updates_fixture_stiffness() -> None:
    s = new_session()
    set_pressure(s, 90.0)
    assert s.pressure.pressure_kpa == 90.0
    wrist = wrist_stiffness(default_calibration(), 90.0)
    swab = s.swab
    expected = wrist.axial_n_per_mm * swab.axial_n_per_mm / (
        wrist.axial_n_per_mm + swab.axial_n_per_mm
    )
    assert s.fixture.k_axial_effective_n_per_mm == pytest.approx(expected, rel=1e-12)


def test_set_pressure_rejected_after_locked_home() -> None:
    s = new_session()
    advance_to_sampling(s)
    with pytest.raises(PhaseViolationError):
        set_pressure(s, 30.0)


def test_pressure_setting_range() -> None:
    with pytest.raises(OutOfRangeError):
        PressureSetting(100.0)
    with pytest.raises(OutOfRangeError):
        PressureSetting(-30.5)
    s = new_session()
    with pytest.raises(OutOfRangeError):
        set_pressure(s, 100.0)


def test_vf_radius_and_scale_frozen_once_sampling() -> None:
    s = new_session()
    set_vf_radius(s, 20.0)
    assert s.fixture.r_throat_mm == 20.0
    set_scale(s, 3.0)
    assert s.mapping.k_scale == 3.0
    with pytest.raises(OutOfRangeError):
        set_vf_radius(s, 5.0)
    advance_to_sampling(s)
    with pytest.raises(PhaseViolationError):
        set_vf_radius(s, 25.0)
    with pytest.raises(PhaseViolationError):
        set_scale(s, 2.0)
    assert s.fixture.r_throat_mm == 20.0


# -------------------------------------------------------------------- jogs


def test_jog_moves_joint_at_rate_limit() -> None:
    s = new_session()
    control_step(s, StepInput(jog=JogCommand("j2", 30.0)))
    # 10 deg/s at 40 ms steps: 0.4 deg per step, first step already applied
    assert s.rcm.j2_deg == pytest.approx(0.4)
    run_steps(s, 73)
    assert s.rcm.j2_deg == pytest.approx(0.4 * 74)
    run_steps(s, 2)
    assert s.rcm.j2_deg == 30.0
    assert not s.jog_targets


def test_jog_target_saturates_at_joint_range() -> None:
    s = new_session()
    control_step(s, StepInput(jog=JogCommand("j2", 500.0)))
    run_steps(s, 400)
    assert s.rcm.j2_deg == 47.0


def test_jog_legality_by_phase() -> None:
    s = new_session()
    with pytest.raises(PhaseViolationError):
        control_step(s, StepInput(jog=JogCommand("j1", 10.0)))
    fsm_advance(s, "start")
    run_steps(s, 8)
    fsm_advance(s, "pedal")
    run_steps(s, 8)
    fsm_advance(s, "advance")
    with pytest.raises(PhaseViolationError):
        control_step(s, StepInput(jog=JogCommand("j2", 5.0)))
    control_step(s, StepInput(jog=JogCommand("j1", 40.0)))
    assert s.rcm.j1_mm == pytest.approx(0.4)
    with pytest.raises(OutOfRangeError):
        control_step(s, StepInput(jog=JogCommand("j9", 1.0)))


def test_phase_change_cancels_pending_jogs() -> None:
    s = new_session()
    fsm_advance(s, "start")
    run_steps(s, 8)
    fsm_advance(s, "pedal")
    run_steps(s, 8)
    fsm_advance(s, "advance")
    control_step(s, StepInput(jog=JogCommand("j1", 50.0)))
    j1_before = s.rcm.j1_mm
    fsm_advance(s, "trigger")
    run_steps(s, 5)
    assert s.rcm.j1_mm == j1_before


# ---------------------------------------------------------------- pipeline


def test_master_delta_moves_wrist_through_mapping() -> None:
    s = new_session()
    advance_to_sampling(s)
    origin = s.fixture.origin_mm.copy()
    control_step(s, StepInput(master_delta_mm=np.array([2.0, 4.0, 6.0])))
    # slave delta (2, 1, -3), interior: wrist lands on it, no force
    np.testing.assert_allclose(
        arc_endpoint(s.wrist_q, s.geom), origin + [2.0, 1.0, -3.0], atol=1e-6
    )
    np.testing.assert_allclose(s.last_master_force_n, 0.0, atol=0.0)


def test_master_delta_rejected_outside_sampling() -> None:
    s = new_session()
    fsm_advance(s, "start")
    run_steps(s, 8)
    fsm_advance(s, "pedal")
    q_before = s.wrist_q
    steps_before = len(s.trace)
    with pytest.raises(PhaseViolationError):
        control_step(s, StepInput(master_delta_mm=np.array([1.0, 0.0, 0.0])))
    assert s.wrist_q == q_before
    assert len(s.trace) == steps_before


def test_overdrive_stops_at_bound_with_force_echo() -> None:
    s = new_session()
    advance_to_sampling(s)
    bound = s.fixture.length_bound_mm()
    for _ in range(30):
        # operator pushes insertion: master -z maps to slave +z
        control_step(s, StepInput(master_delta_mm=np.array([0.0, 0.0, -2.0])))
    assert s.wrist_q.length_mm <= bound + 1e-6
    assert s.wrist_q.length_mm == pytest.approx(bound, abs=1e-5)
    # echo pushes the operator hand back along +z (axis map flips z)
    assert s.last_master_force_n[2] > 0.0
    assert np.linalg.norm(s.last_master_force_n) <= 3.0 + 1e-12
    for row in s.trace:
        assert row.l_mm <= bound + 1e-6


def test_fixture_off_overdrive_saturates_at_actuator_envelope() -> None:
    s = new_session()
    advance_to_sampling(s)
    fsm_advance(s, "trigger")  # fixture off
    for _ in range(40):
        control_step(s, StepInput(master_delta_mm=np.array([0.0, 0.0, -4.0])))
    # wrist ran past the fixture bound and stopped only at cable travel
    assert s.wrist_q.length_mm > s.fixture.length_bound_mm()
    config_to_actuator(s.wrist_q, s.geom)  # still a valid command
    q_stuck = s.wrist_q
    control_step(s, StepInput(master_delta_mm=np.array([0.0, 0.0, -4.0])))
    assert s.wrist_q == q_stuck


# ------------------------------------------------------------------- trace


def test_trace_is_append_only_and_monotone() -> None:
    s = new_session()
    run_steps(s, 10)
    assert len(s.trace) == 10
    times = [row.t_s for row in s.trace]
    assert times == sorted(times)
    assert times[0] == pytest.approx(CONTROL_DT_S)
    assert times[-1] == pytest.approx(10 * CONTROL_DT_S)


def test_trace_positions_include_insertion_travel() -> None:
    s = new_session()
    fsm_advance(s, "start")
    run_steps(s, 8)
    fsm_advance(s, "pedal")
    run_steps(s, 8)
    fsm_advance(s, "advance")
    control_step(s, StepInput(jog=JogCommand("j1", 40.0)))
    run_steps(s, 120)
    assert s.rcm.j1_mm == 40.0
    tip_rest_z = s.geom.rest_length_mm + s.geom.tip_offset_mm
    assert s.trace[-1].z_mm == pytest.approx(tip_rest_z + 40.0)


def test_trace_csv_roundtrip(tmp_path) -> None:
    s = new_session()
    advance_to_sampling(s)
    for _ in range(5):
        control_step(s, StepInput(master_delta_mm=np.array([0.5, 0.2, -1.0])))
    path = tmp_path / "trace.csv"
    save_trace(s.trace, path)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(TRACE_HEADER)
    back = load_trace(path)
    assert len(back) == len(s.trace)
    for a, b in zip(back, s.trace):
        assert a.phase == b.phase
        assert a.vf_active == b.vf_active
        for name in ("t_s", "x_mm", "y_mm", "z_mm", "alpha_rad", "beta_rad", "l_mm"):
            assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-8, abs=1e-9)


def test_snapshot_reflects_session() -> None:
    s = new_session()
    advance_to_sampling(s)
    control_step(s, StepInput(master_delta_mm=np.array([2.0, 4.0, 6.0])))
    snap = snapshot(s)
    assert snap["phase"] == "TeleopSampling"
    assert snap["fixture"]["enabled"] is True
    assert snap["gripper"] == "closed"
    assert snap["tip_scene_mm"][2] == pytest.approx(
        s.trace[-1].z_mm
    )
    assert snap["wrist"]["length_mm"] == s.wrist_q.length_mm


def test_control_step_budget_smoke() -> None:
    s = new_session()
    advance_to_sampling(s)
    rng = np.random.default_rng(2)
    durations = []
    for _ in range(1000):
        delta = rng.uniform(-1.5, 1.5, size=3)
        t0 = time.perf_counter()
        control_step(s, StepInput(master_delta_mm=delta))
        durations.append(time.perf_counter() - t0)
    p99 = sorted(durations)[989]
    assert p99 < 0.04, f"p99 step time {p99 * 1e3:.2f} ms"
