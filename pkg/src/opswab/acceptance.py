"""Operational acceptance suite: one callable check per shipping criterion.

Each criterion measures the system end to end and returns a
:class:`CriterionResult` carrying the measured value and the bound it was
held to.  ``run_all`` executes the whole suite in order; the command line's
``acceptance`` subcommand prints one line per criterion and exits nonzero
on any failure.  Every check is deterministic (fixed seeds).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, default_config
from .fixture import FixtureSpec, project
from .kinematics import (
    ActuatorLengths,
    ConfigState,
    WristGeometry,
    actuator_to_config,
    arc_endpoint,
    config_to_actuator,
    tip_to_config,
)
from .mapping import MasterMapping, map_master_delta
from .replay import (
    overdrive_script,
    run_replay,
    run_script,
    sampling_script,
    session_from_config,
)
from .stiffness import (
    CAL_PRESSURES_KPA,
    F_SAFETY_N,
    MEASURED_EFFECTIVE,
    default_calibration,
    default_swabs,
    effective_stiffness,
    wrist_stiffness,
)
from .teleop import StepInput, control_step

_SEED = 20260819


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    measured: str
    bound: str
    detail: str = ""

    def line(self) -> str:
        text = (
            f"{'PASS' if self.passed else 'FAIL'}  {self.name}: "
            f"{self.measured}  [bound: {self.bound}]"
        )
        return text + (f"  ({self.detail})" if self.detail else "")


# ------------------------------------------------------------ criterion 1


def criterion_kinematics_roundtrips(
    config: RunConfig | None = None, n: int = 10_000
) -> CriterionResult:
    """Space-change roundtrips are exact to 1e-9 over random valid states."""
    geom = (config or default_config()).geom
    rng = np.random.default_rng(_SEED)
    start = time.perf_counter()

    cables = rng.uniform(geom.cable_min_mm, geom.cable_max_mm, size=(n, 3))
    worst_actuator = 0.0
    for l1, l2, l3 in cables:
        q = actuator_to_config(ActuatorLengths(l1, l2, l3), geom)
        back = config_to_actuator(q, geom).as_array()
        worst_actuator = max(worst_actuator, float(np.abs(back - (l1, l2, l3)).max()))

    # configurations whose cables stay in travel for every azimuth
    beta_cap = (geom.cable_max_mm - geom.cable_min_mm) / (2.0 * geom.cable_pitch_mm)
    alphas = rng.uniform(-math.pi, math.pi, n)
    betas = rng.uniform(0.0, min(beta_cap, geom.max_bend_rad) * 0.999, n)
    worst_tip = 0.0
    for alpha, beta in zip(alphas, betas):
        lo = geom.cable_min_mm + geom.cable_pitch_mm * beta
        hi = geom.cable_max_mm - geom.cable_pitch_mm * beta
        q = ConfigState(float(alpha), float(beta), float(rng.uniform(lo, hi)))
        point = arc_endpoint(q, geom)
        again = arc_endpoint(tip_to_config(point, geom), geom)
        worst_tip = max(worst_tip, float(np.abs(again - point).max()))

    elapsed = time.perf_counter() - start
    passed = worst_actuator < 1e-9 and worst_tip < 1e-9 and elapsed < 5.0
    return CriterionResult(
        name="kinematics-roundtrips",
        passed=passed,
        measured=(
            f"max errors {worst_actuator:.2e} mm (actuator), "
            f"{worst_tip:.2e} mm (tool point) over {n} states in {elapsed:.2f} s"
        ),
        bound="both < 1e-9, runtime < 5 s",
    )


# ------------------------------------------------------------ criterion 2


def criterion_stiffness_reproduction(config: RunConfig | None = None) -> CriterionResult:
    """The shipped calibration reproduces the bench measurements it came from."""
    calibration = default_calibration()
    swabs = default_swabs()
    worst = 0.0
    for name in ("wood", "metal"):
        for i, pressure in enumerate(CAL_PRESSURES_KPA):
            wrist = wrist_stiffness(calibration, pressure)
            value = effective_stiffness(wrist, swabs[name]).axial_n_per_mm
            reference = MEASURED_EFFECTIVE[name]["axial"][i]
            worst = max(worst, abs(value - reference) / reference)
    plastic_worst = 0.0
    for i, pressure in enumerate(CAL_PRESSURES_KPA):
        wrist = wrist_stiffness(calibration, pressure)
        value = effective_stiffness(wrist, swabs["plastic"]).axial_n_per_mm
        reference = MEASURED_EFFECTIVE["plastic"]["axial"][i]
        plastic_worst = max(plastic_worst, abs(value - reference) / reference)
    return CriterionResult(
        name="stiffness-reproduction",
        passed=worst <= 0.05,
        measured=f"worst axial deviation {worst:.2%} (wood, metal; all pressures)",
        bound="<= 5% relative",
        detail=(
            "plastic's implied wrist stiffness disagrees with the other swabs "
            "by ~40% and is excluded from the fit; its reproduced effective "
            f"values deviate up to {plastic_worst:.1%} (reported, not asserted)"
        ),
    )


# ------------------------------------------------------------ criterion 3


def criterion_force_cap(config: RunConfig | None = None) -> CriterionResult:
    """Constrained overdrive stays under the comfort force; unconstrained exceeds it."""
    cfg = config or default_config()
    _, rep_on = run_replay(cfg, overdrive_script(vf_on=True))
    _, rep_off = run_replay(cfg, overdrive_script(vf_on=False))
    passed = (
        rep_on.max_normal_force_n <= F_SAFETY_N + 1e-6
        and rep_off.max_normal_force_n > F_SAFETY_N
    )
    return CriterionResult(
        name="force-cap",
        passed=passed,
        measured=(
            f"peak normal force {rep_on.max_normal_force_n:.6f} N constrained, "
            f"{rep_off.max_normal_force_n:.3f} N unconstrained"
        ),
        bound=f"<= {F_SAFETY_N} + 1e-6 N with fixture, > {F_SAFETY_N} N without",
    )


# ------------------------------------------------------------ criterion 4


def _arc_lengths(points_abs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form arc length and bend angle for absolute endpoints."""
    rad = np.hypot(points_abs[:, 0], points_abs[:, 1])
    z = points_abs[:, 2]
    beta = 2.0 * np.arctan2(rad, z)
    chord = np.hypot(rad, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        half = np.sin(np.minimum(beta, math.pi - 1e-9) / 2.0)
        length = np.where(beta < 1e-9, z, beta * chord / (2.0 * half))
    return length, beta


def _line_minimum(
    command: np.ndarray, fixture: FixtureSpec, geom: WristGeometry, n: int = 120_001
) -> float:
    """Best objective on the staged feasible set, by dense enumeration.

    The radial clamp is exact, so the remaining freedom is the vertical
    command line; scanning it at ~6e-4 mm resolution gives an independent
    minimizer to hold the analytic projection against.
    """
    rad = math.hypot(command[0], command[1])
    xy = np.array(command[:2], dtype=float)
    if rad > fixture.r_throat_mm:
        xy *= fixture.r_throat_mm / rad
    z_lo = -float(fixture.origin_mm[2]) + 1e-3
    z_hi = max(float(command[2]), 2.0) + 1.0
    zs = np.linspace(z_lo, z_hi, n)
    pts = np.column_stack([np.full(n, xy[0]), np.full(n, xy[1]), zs]) + np.asarray(
        fixture.origin_mm, dtype=float
    )
    length, beta = _arc_lengths(pts)
    ok = (
        (pts[:, 2] > 0)
        & (beta <= geom.max_bend_rad)
        & (length <= fixture.length_bound_mm())
    )
    candidates = pts[ok] - np.asarray(fixture.origin_mm, dtype=float)
    return float(np.min(np.linalg.norm(candidates - command, axis=1)))


def _grid_minimum_table(
    fixture: FixtureSpec, geom: WristGeometry, n: int = 21
) -> np.ndarray:
    """Feasible points of an n^3 grid over the constraint set's bounding box."""
    r = fixture.r_throat_mm
    allowance = fixture.length_bound_mm() - fixture.l_button_mm
    origin = np.asarray(fixture.origin_mm, dtype=float)
    xs = np.linspace(-r, r, n)
    zs = np.linspace(-origin[2] + 0.1, allowance, n)
    X, Y, Z = np.meshgrid(xs, xs, zs, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    length, beta = _arc_lengths(pts + origin)
    rad = np.hypot(pts[:, 0], pts[:, 1])
    ok = (
        (pts[:, 2] + origin[2] > 0)
        & (beta <= geom.max_bend_rad)
        & (length <= fixture.length_bound_mm())
        & (rad <= r)
    )
    return pts[ok]


def criterion_projection_oracle(
    config: RunConfig | None = None, n_commands: int = 500
) -> CriterionResult:
    """The staged projector matches a brute-force minimizer of each stage.

    500 random commands over the constraint set's bounding box; the
    projector's objective (distance moved) must agree with dense
    enumeration of the staged feasible line to 1e-3 mm.  A coarse global
    grid additionally bounds how far the xy-first staging can sit from the
    unstaged minimizer (the two stages are prioritized, not traded off).
    """
    cfg = config or default_config()
    geom = cfg.geom
    k_axial = effective_stiffness(
        wrist_stiffness(cfg.calibration, 0.0), default_swabs()["wood"]
    ).axial_n_per_mm
    rest = ConfigState(0.0, 0.0, geom.rest_length_mm)
    fixture = FixtureSpec(
        origin_mm=arc_endpoint(rest, geom),
        r_throat_mm=20.0,
        l_button_mm=geom.rest_length_mm,
        k_axial_effective_n_per_mm=k_axial,
    )
    grid = _grid_minimum_table(fixture, geom)
    rng = np.random.default_rng(_SEED)
    worst_gap = 0.0
    worst_envelope = -math.inf
    for _ in range(n_commands):
        command = np.array(
            [rng.uniform(-28, 28), rng.uniform(-28, 28), rng.uniform(-10, 5)]
        )
        result = project(command, fixture, rest, geom)
        staged = float(np.linalg.norm(result.delta_cmd_mm - command))
        reference = _line_minimum(command, fixture, geom)
        worst_gap = max(worst_gap, abs(staged - reference))
        grid_best = float(np.min(np.linalg.norm(grid - command, axis=1)))
        worst_envelope = max(worst_envelope, staged - grid_best)
    passed = worst_gap <= 1e-3 and worst_envelope <= 1.0
    return CriterionResult(
        name="projection-oracle",
        passed=passed,
        measured=f"worst objective gap {worst_gap:.2e} mm over {n_commands} commands",
        bound="<= 1e-3 mm vs dense per-stage enumeration",
        detail=(
            f"staged objective sits at most {worst_envelope:.3f} mm above the "
            "21^3 global-grid minimizer (envelope bound 1.0 mm; xy clamping "
            "is prioritized over retraction by design)"
        ),
    )


# ------------------------------------------------------------ criterion 5


def criterion_success_rate(config: RunConfig | None = None, runs: int = 20) -> CriterionResult:
    """Seeded randomized sampling sessions all end with a successful swab."""
    cfg = config or default_config()
    start = time.perf_counter()
    successes = 0
    for seed in range(runs):
        _, report = run_replay(cfg, sampling_script(seed))
        successes += report.success
    elapsed = time.perf_counter() - start
    passed = successes == runs and elapsed < 60.0
    return CriterionResult(
        name="success-rate",
        passed=passed,
        measured=f"{successes}/{runs} successful sessions in {elapsed:.1f} s",
        bound=f"{runs}/{runs}, runtime < 60 s",
    )


# ------------------------------------------------------------ criterion 6


def criterion_loop_timing(
    config: RunConfig | None = None, steps: int = 10_000
) -> CriterionResult:
    """The control step's 99th-percentile latency fits the 40 ms period."""
    cfg = config or default_config()
    session = run_script(session_from_config(cfg), overdrive_script(pushes=1))
    cycle = (
        (0.4, 0.0, 0.0),
        (-0.4, 0.0, 0.0),
        (0.0, 0.4, 0.0),
        (0.0, -0.4, 0.0),
        (0.0, 0.0, -0.4),
        (0.0, 0.0, 0.4),
    )
    times = np.empty(steps)
    for i in range(steps):
        inputs = StepInput(master_delta_mm=cycle[i % len(cycle)])
        start = time.perf_counter()
        control_step(session, inputs)
        times[i] = time.perf_counter() - start
    p99_ms = float(np.percentile(times, 99)) * 1e3
    mean_ms = float(times.mean()) * 1e3
    return CriterionResult(
        name="loop-timing",
        passed=p99_ms < 40.0,
        measured=f"p99 {p99_ms:.2f} ms, mean {mean_ms:.2f} ms over {steps} steps",
        bound="p99 < 40 ms",
    )


# ------------------------------------------------------------ criterion 7


def criterion_master_mapping(config: RunConfig | None = None) -> CriterionResult:
    """Motion mapping arithmetic is exact: axis swap, sign flip, halving."""
    mapping = MasterMapping()
    checks = [
        np.array_equal(
            map_master_delta(np.array([2.0, 4.0, -6.0]), mapping), [2.0, 1.0, 3.0]
        ),
        np.array_equal(
            map_master_delta(np.array([0.0, 2.0, 0.0]), mapping), [1.0, 0.0, 0.0]
        ),
        np.array_equal(
            map_master_delta(np.array([0.0, 0.0, 2.0]), mapping), [0.0, 0.0, -1.0]
        ),
    ]
    rng = np.random.default_rng(_SEED)
    for _ in range(100):
        v = rng.uniform(-10, 10, 3)
        out = map_master_delta(v, mapping)
        checks.append(
            math.isclose(
                float(np.linalg.norm(out)),
                float(np.linalg.norm(v)) / mapping.k_scale,
                rel_tol=1e-12,
            )
        )
    passed = all(checks)
    return CriterionResult(
        name="master-mapping",
        passed=passed,
        measured="axis swap, sign flip and scale halving all exact",
        bound="exact equality on worked examples; norm scaling to 1e-12",
    )


# ------------------------------------------------------------ criterion 8


def criterion_transport_transparency(config: RunConfig | None = None) -> CriterionResult:
    """A wire-driven scripted session reproduces the in-process trace."""
    import asyncio
    import tempfile
    from pathlib import Path

    from websockets.asyncio.client import connect

    from .config import with_trace_out
    from .protocol import decode, encode
    from .replay import as_wire_messages
    from .service import Gateway
    from .teleop import load_trace, save_trace

    cfg = config or default_config()
    script = sampling_script(0)

    async def drive(tmp: Path) -> Path:
        wire_path = tmp / "wire_trace.csv"
        async with Gateway(with_trace_out(cfg, wire_path), port=0) as gateway:
            uri = f"ws://127.0.0.1:{gateway.bound_port}/lockstep"
            async with connect(uri) as ws:
                for frame in as_wire_messages(script):
                    await ws.send(encode(frame))
                    first = decode(await ws.recv())
                    second = decode(await ws.recv())
                    assert first.kind == "state_update" and second.kind == "force_echo"
            for _ in range(100):  # wait for the handler to flush the trace
                if wire_path.exists():
                    break
                await asyncio.sleep(0.02)
        return wire_path

    with tempfile.TemporaryDirectory() as tmpdir:
        tmp = Path(tmpdir)
        wire_path = asyncio.run(drive(tmp))
        wire_rows = load_trace(wire_path)
        session, _ = run_replay(cfg, script)
        local_path = tmp / "local_trace.csv"
        save_trace(session.trace, local_path)
        local_rows = load_trace(local_path)
        identical_bytes = wire_path.read_bytes() == local_path.read_bytes()

    worst = math.inf
    if len(wire_rows) == len(local_rows):
        worst = 0.0
        numeric = ("t_s", "x_mm", "y_mm", "z_mm", "alpha_rad", "beta_rad", "l_mm",
                   "fx_n", "fy_n", "fz_n")
        for wire_row, local_row in zip(wire_rows, local_rows):
            if wire_row.phase != local_row.phase or wire_row.vf_active != local_row.vf_active:
                worst = math.inf
                break
            for name in numeric:
                worst = max(worst, abs(getattr(wire_row, name) - getattr(local_row, name)))
    passed = worst <= 1e-9
    return CriterionResult(
        name="transport-transparency",
        passed=passed,
        measured=(
            f"worst numeric column gap {worst:.1e} over {len(wire_rows)} rows; "
            f"trace files byte-identical: {identical_bytes}"
        ),
        bound="<= 1e-9 per numeric column",
    )


# ------------------------------------------------------------------ runner


ALL_CRITERIA = (
    criterion_kinematics_roundtrips,
    criterion_stiffness_reproduction,
    criterion_force_cap,
    criterion_projection_oracle,
    criterion_success_rate,
    criterion_loop_timing,
    criterion_master_mapping,
    criterion_transport_transparency,
)


def run_all(config: RunConfig | None = None) -> list[CriterionResult]:
    cfg = config or default_config()
    return [criterion(cfg) for criterion in ALL_CRITERIA]
