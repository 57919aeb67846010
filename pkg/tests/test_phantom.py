"""Phantom contact model and sampling-success tests."""

from __future__ import annotations

import math

import numpy as np
import pytest

from opswab.errors import OutOfRangeError
from opswab.kinematics import ConfigState, TipPose, WristGeometry, config_to_tip
from opswab.phantom import (
    ContactReport,
    DEFAULT_SWAB_LENGTH_MM,
    PhantomModel,
    SuccessReport,
    contact,
    evaluate_success,
    max_normal_force,
)
from opswab.stiffness import MEASURED_EFFECTIVE, StiffnessPair, effective_stiffness, wrist_stiffness
from opswab.teleop import (
    CONTROL_DT_S,
    JogCommand,
    StepInput,
    TraceRow,
    control_step,
    fsm_advance,
    new_session,
)

K_TEST = StiffnessPair(axial_n_per_mm=2.854, lateral_n_per_rad=6.0)


def straight_tip(z_mm: float, x_mm: float = 0.0, y_mm: float = 0.0) -> TipPose:
    return TipPose(np.array([x_mm, y_mm, z_mm]), np.eye(3))


def make_row(
    t_s: float,
    z_mm: float,
    x_mm: float = 0.0,
    y_mm: float = 0.0,
    beta_rad: float = 0.0,
) -> TraceRow:
    return TraceRow(
        t_s=t_s,
        phase="TeleopSampling",
        x_mm=x_mm,
        y_mm=y_mm,
        z_mm=z_mm,
        alpha_rad=0.0,
        beta_rad=beta_rad,
        l_mm=65.0,
        fx_n=0.0,
        fy_n=0.0,
        fz_n=0.0,
        vf_active=True,
    )


def test_above_surface_is_force_free() -> None:
    rep = contact(straight_tip(120.0), PhantomModel(), K_TEST)
    assert rep == ContactReport(False, 0.0, 0.0, 0.0, False)


def test_unit_penetration_at_comfort_stiffness() -> None:
    k = StiffnessPair(axial_n_per_mm=0.588, lateral_n_per_rad=1.0)
    rep = contact(straight_tip(186.0), PhantomModel(), k)
    assert rep.in_contact
    assert rep.penetration_mm == pytest.approx(1.0)
    assert rep.normal_force_n == pytest.approx(0.588)


def test_three_mm_plastic_overdrive_exceeds_comfort() -> None:
    # measured effective axial stiffness of the soft swab at 90 kPa
    k_axial = MEASURED_EFFECTIVE["plastic"]["axial"][-1]
    k = StiffnessPair(axial_n_per_mm=k_axial, lateral_n_per_rad=1.119)
    rep = contact(straight_tip(188.0), PhantomModel(), k)
    assert rep.penetration_mm == pytest.approx(3.0)
    assert rep.normal_force_n == pytest.approx(3.579, abs=1e-3)
    assert rep.normal_force_n > 0.588


def test_force_continuous_at_contact_onset() -> None:
    geom = WristGeometry()
    bent = config_to_tip(ConfigState(0.5, 0.4, 70.0), geom)
    z_surface = PhantomModel().z_throat_mm
    just_above = TipPose(
        bent.position_mm + [0, 0, z_surface - bent.position_mm[2] - 1e-9],
        bent.orientation,
    )
    just_below = TipPose(
        bent.position_mm + [0, 0, z_surface - bent.position_mm[2] + 1e-9],
        bent.orientation,
    )
    above = contact(just_above, PhantomModel(), K_TEST)
    below = contact(just_below, PhantomModel(), K_TEST)
    assert above.normal_force_n == 0.0
    assert below.normal_force_n < 1e-6
    assert below.lateral_force_n < 1e-6


def test_lateral_force_law() -> None:
    geom = WristGeometry()
    q = ConfigState(0.0, 0.3, 70.0)
    tip = config_to_tip(q, geom)
    # push the pose 2 mm past the surface by raising the scene frame
    shift = PhantomModel().z_throat_mm - tip.position_mm[2] + 2.0
    rep = contact(
        TipPose(tip.position_mm + [0, 0, shift], tip.orientation),
        PhantomModel(),
        K_TEST,
    )
    expected = K_TEST.lateral_n_per_rad * 2.0 * math.sin(0.3) / DEFAULT_SWAB_LENGTH_MM
    assert rep.lateral_force_n == pytest.approx(expected, rel=1e-9)
    assert rep.normal_force_n == pytest.approx(2.0 * K_TEST.axial_n_per_mm, rel=1e-9)


def test_on_target_requires_contact_and_patch() -> None:
    phantom = PhantomModel(patch_radius_mm=5.0)
    on = contact(straight_tip(186.0, x_mm=3.0), phantom, K_TEST)
    off = contact(straight_tip(186.0, x_mm=6.0), phantom, K_TEST)
    high = contact(straight_tip(120.0, x_mm=0.0), phantom, K_TEST)
    assert on.on_target and on.in_contact
    assert off.in_contact and not off.on_target
    assert not high.on_target


def test_phantom_validation() -> None:
    with pytest.raises(OutOfRangeError):
        PhantomModel(patch_center_mm=(18.0, 0.0), patch_radius_mm=5.0)
    with pytest.raises(OutOfRangeError):
        PhantomModel(cavity_radius_mm=-1.0)
    with pytest.raises(OutOfRangeError):
        PhantomModel(z_throat_mm=0.0)


# --------------------------------------------------------------- success


def test_never_touching_trace_fails() -> None:
    trace = [make_row((i + 1) * CONTROL_DT_S, 150.0) for i in range(50)]
    rep = evaluate_success(trace, PhantomModel(), K_TEST)
    assert rep == SuccessReport(False, 0.0)


def test_one_second_gentle_dwell_succeeds() -> None:
    pen = 0.3 / K_TEST.axial_n_per_mm  # 0.3 N
    z = PhantomModel().z_throat_mm + pen
    trace = [make_row((i + 1) * CONTROL_DT_S, z) for i in range(25)]
    rep = evaluate_success(trace, PhantomModel(), K_TEST)
    assert rep.success
    assert rep.dwell_s == pytest.approx(1.0)


def test_force_window_boundaries() -> None:
    phantom = PhantomModel()
    # 0.25 mm penetration is exact in binary, so k scales to the exact
    # boundary forces and the window edges are hit dead on
    rows = [make_row((i + 1) * CONTROL_DT_S, 185.25) for i in range(50)]
    at_max = StiffnessPair(axial_n_per_mm=4 * 0.588, lateral_n_per_rad=6.0)
    at_min = StiffnessPair(axial_n_per_mm=4 * 0.05, lateral_n_per_rad=6.0)
    over = StiffnessPair(axial_n_per_mm=4.0, lateral_n_per_rad=6.0)
    # exactly the safety bound still qualifies; above it never does
    assert evaluate_success(rows, phantom, at_max).success
    assert not evaluate_success(rows, phantom, over).success
    # the minimum force is strict
    assert evaluate_success(rows, phantom, at_min).dwell_s == 0.0


def test_off_patch_dwell_does_not_count() -> None:
    phantom = PhantomModel(patch_radius_mm=4.0)
    z = phantom.z_throat_mm + 0.1
    trace = [make_row((i + 1) * CONTROL_DT_S, z, x_mm=8.0) for i in range(50)]
    rep = evaluate_success(trace, phantom, K_TEST)
    assert not rep.success and rep.dwell_s == 0.0


def test_interrupted_dwell_accumulates() -> None:
    phantom = PhantomModel()
    z = phantom.z_throat_mm + 0.3 / K_TEST.axial_n_per_mm
    rows = []
    t = 0.0
    for burst in range(2):  # two 0.28 s bursts with a lift between
        for _ in range(7):
            t += CONTROL_DT_S
            rows.append(make_row(t, z))
        for _ in range(5):
            t += CONTROL_DT_S
            rows.append(make_row(t, 150.0))
    rep = evaluate_success(rows, phantom, K_TEST)
    assert rep.dwell_s == pytest.approx(0.56)
    assert rep.success


def test_max_normal_force_scans_trace() -> None:
    phantom = PhantomModel()
    rows = [
        make_row(0.04, phantom.z_throat_mm - 5.0),
        make_row(0.08, phantom.z_throat_mm + 0.2),
        make_row(0.12, phantom.z_throat_mm + 0.05),
    ]
    peak = max_normal_force(rows, phantom, K_TEST)
    assert peak == pytest.approx(0.2 * K_TEST.axial_n_per_mm)


# ----------------------------------------------------- pipeline integration


def run_sampling_session(vf_on: bool, push_steps: int = 60):
    """Insert to the throat plane, anchor, push; return (session, k_eff)."""
    s = new_session()
    fsm_advance(s, "start")
    for _ in range(8):
        control_step(s)
    fsm_advance(s, "pedal")
    for _ in range(8):
        control_step(s)
    fsm_advance(s, "advance")
    control_step(s, StepInput(jog=JogCommand("j1", 40.0)))
    for _ in range(110):
        control_step(s)
    assert s.rcm.j1_mm == 40.0
    fsm_advance(s, "trigger")
    if not vf_on:
        fsm_advance(s, "trigger")  # suspend the fixture, keep sampling
    for _ in range(push_steps):
        # master pushes insertion (master -z maps to slave +z)
        control_step(s, StepInput(master_delta_mm=np.array([0.0, 0.0, -1.0])))
    k_wrist = wrist_stiffness(s.calibration, s.pressure)
    k_eff = effective_stiffness(k_wrist, s.swab)
    return s, k_eff


def test_fixture_on_run_respects_comfort_force() -> None:
    s, k_eff = run_sampling_session(vf_on=True)
    phantom = PhantomModel()
    peak = max_normal_force(s.trace, phantom, k_eff)
    assert 0.0 < peak <= 0.588 + 1e-6
    rep = evaluate_success(s.trace, phantom, k_eff)
    assert rep.success


def test_fixture_off_run_exceeds_comfort_force() -> None:
    s, k_eff = run_sampling_session(vf_on=False, push_steps=80)
    peak = max_normal_force(s.trace, PhantomModel(), k_eff)
    assert peak > 0.588
