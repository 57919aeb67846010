"""Exception types shared across the stack."""


class OpswabError(Exception):
    """Base class for all package errors."""


class OutOfRangeError(OpswabError):
    """A value left its allowed interval (cable length, joint angle, pressure)."""


class UnreachableError(OpswabError):
    """Kinematic target lies outside the reachable envelope."""


class InvalidTargetError(OpswabError):
    """Kinematic target is geometrically invalid, e.g. non-positive insertion depth."""


class OutOfCalibrationRangeError(OpswabError):
    """Pressure outside the calibration hull plus the extrapolation margin."""


class InconsistentDataError(OpswabError):
    """Calibration rows are mutually inconsistent and no usable row remains."""


class IkUnreachableError(OpswabError):
    """Constraint projection found no feasible commanded point."""


class PhaseViolationError(OpswabError):
    """Input of this type is illegal in the current session phase."""


class IllegalTransitionError(OpswabError):
    """Event does not apply to the current session phase."""


class ConfigError(OpswabError):
    """Run configuration is malformed or inconsistent."""


class ScriptError(OpswabError):
    """Replay input file is malformed; the message carries the line number."""


class ProtocolError(OpswabError):
    """Wire message violates the protocol contract."""


class ProtocolVersionError(ProtocolError):
    """Wire message carries an unsupported protocol version."""
