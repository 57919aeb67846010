"""Teleoperated oropharyngeal swab-sampling stack.

A continuum soft wrist with pressure-tunable stiffness, driven over a wire
protocol by an operator console.  The package splits into kinematics
(cable-driven constant-curvature wrist), stiffness (chamber calibration and
the series swab model), mapping (console-to-wrist motion transfer), fixture
(the hybrid motion/stiffness constraint with haptic rendering), phantom
(simulated oral cavity for scoring), teleop (the 25 Hz session runtime and
its state machine), plus the gateway layers: config, protocol, replay,
service, acceptance and cli.

The gateway service (``opswab.service``) and the command line are imported
lazily so the core library stays importable without a websocket stack.
"""

from .config import (
    RunConfig,
    default_config,
    load_config,
    load_measured_effective,
    load_swabs,
    save_measured_effective,
    save_swabs,
    with_trace_out,
    write_config,
)
from .errors import (
    ConfigError,
    IkUnreachableError,
    IllegalTransitionError,
    InconsistentDataError,
    InvalidTargetError,
    OpswabError,
    OutOfCalibrationRangeError,
    OutOfRangeError,
    PhaseViolationError,
    ProtocolError,
    ProtocolVersionError,
    ScriptError,
    UnreachableError,
)
from .fixture import (
    MASTER_FORCE_CAP_N,
    R_THROAT_MAX_MM,
    R_THROAT_MIN_MM,
    ConstraintForce,
    FixtureSpec,
    HapticGains,
    ProjectionResult,
    master_force,
    motion_force,
    project,
    stiffness_force,
)
from .kinematics import (
    HUMAN_WRIST_TRAVEL_MM,
    ActuatorLengths,
    ConfigState,
    TipPose,
    WristGeometry,
    actuator_to_config,
    arc_endpoint,
    config_to_actuator,
    config_to_tip,
    numeric_jacobian,
    tip_to_config,
    workspace_sample,
)
from .mapping import DEFAULT_AXIS_MAP, MasterMapping, map_master_delta
from .phantom import (
    MAX_SAMPLING_FORCE_N,
    MIN_DWELL_S,
    MIN_SAMPLING_FORCE_N,
    ContactReport,
    PhantomModel,
    SuccessReport,
    contact,
    evaluate_success,
    max_normal_force,
)
from .protocol import PROTOCOL_VERSION, WireMessage, decode, encode
from .replay import (
    IDLE,
    ReplayReport,
    StepCommand,
    as_wire_messages,
    load_script,
    overdrive_script,
    run_replay,
    sampling_script,
    save_script,
)
from .stiffness import (
    CAL_PRESSURES_KPA,
    F_SAFETY_N,
    MEASURED_EFFECTIVE,
    CalibrationResult,
    CalibrationTable,
    PressureSetting,
    StiffnessPair,
    SwabSpec,
    calibrate_from_effective,
    check_pressure,
    default_calibration,
    default_swabs,
    effective_stiffness,
    invert_effective,
    load_calibration,
    safe_deflection,
    save_calibration,
    wrist_stiffness,
)
from .teleop import (
    CONTROL_DT_S,
    EVENTS,
    JogCommand,
    Phase,
    SessionState,
    StepInput,
    TraceRow,
    control_step,
    fsm_advance,
    load_trace,
    new_session,
    record_state,
    save_trace,
    set_pressure,
    set_scale,
    set_vf_radius,
    snapshot,
    submit_jog,
)

__version__ = "1.0.0"
