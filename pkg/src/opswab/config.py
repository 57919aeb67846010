"""Run configuration: load, validate and persist the settings of a session.

The configuration file is INI-style text (sections of key = value pairs)
parsed with :mod:`configparser`.  Every referenced file must exist and parse,
and every range check runs here at load time, so a session built from a
``RunConfig`` can no longer fail on bad settings mid-procedure.

Sections and keys (all optional, defaults shown by ``write_config``):

``[wrist]``
    cable_pitch_mm, rest_length_mm, cable_min_mm, cable_max_mm,
    max_bend_rad, tip_offset_mm
``[stiffness]``
    calibration (path to a calibration CSV, or ``default``), swab
    (registry name), pressure_kpa
``[phantom]``
    z_throat_mm, cavity_radius_mm, patch_center_x_mm, patch_center_y_mm,
    patch_radius_mm
``[mapping]``
    k_scale, axis_map (nine integers, row major)
``[haptics]``
    k_motion_n_per_mm, k_stiffness
``[fixture]``
    vf_radius_mm
``[service]``
    port
``[paths]``
    trace_out
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError, OpswabError
from .fixture import R_THROAT_MAX_MM, R_THROAT_MIN_MM, HapticGains
from .kinematics import WristGeometry
from .mapping import MasterMapping
from .phantom import PhantomModel
from .stiffness import (
    CalibrationTable,
    SwabSpec,
    check_pressure,
    default_calibration,
    default_swabs,
    load_calibration,
)

SWAB_CSV_HEADER = ("name", "axial_n_per_mm", "lateral_n_per_rad", "length_mm")
MEASURED_CSV_HEADER = ("swab", "pressure_kpa", "axial_n_per_mm", "lateral_n_per_rad")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated settings for one service, replay or acceptance run."""

    geom: WristGeometry = field(default_factory=WristGeometry)
    calibration: CalibrationTable = field(default_factory=default_calibration)
    calibration_path: str | None = None
    swab: SwabSpec = field(default_factory=lambda: default_swabs()["wood"])
    phantom: PhantomModel = field(default_factory=PhantomModel)
    mapping: MasterMapping = field(default_factory=MasterMapping)
    gains: HapticGains = field(default_factory=HapticGains)
    pressure_kpa: float = 0.0
    vf_radius_mm: float = 15.0
    port: int = 8765
    trace_out: Path = Path("trace.csv")

    def __post_init__(self) -> None:
        check_pressure(self.pressure_kpa)
        if not R_THROAT_MIN_MM <= self.vf_radius_mm <= R_THROAT_MAX_MM:
            raise ConfigError(
                f"vf_radius_mm {self.vf_radius_mm:g} outside "
                f"[{R_THROAT_MIN_MM:g}, {R_THROAT_MAX_MM:g}]"
            )
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port {self.port} outside 1..65535")


def default_config() -> RunConfig:
    return RunConfig()


def _float(section: configparser.SectionProxy, key: str, fallback: float) -> float:
    try:
        return section.getfloat(key, fallback=fallback)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from exc


def _parse_axis_map(text: str) -> tuple[tuple[int, ...], ...]:
    parts = text.replace(",", " ").split()
    if len(parts) != 9:
        raise ConfigError(f"axis_map needs nine entries, got {len(parts)}")
    try:
        flat = [int(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"axis_map entries must be integers: {exc}") from exc
    return tuple(tuple(flat[i : i + 3]) for i in (0, 3, 6))


def load_config(path: str | Path) -> RunConfig:
    """Parse a configuration file; reject every bad value here, not later."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file {path} does not exist")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    base = RunConfig()
    try:
        wrist = parser["wrist"] if parser.has_section("wrist") else {}
        geom = WristGeometry(
            **{
                f.name: _float(wrist, f.name, getattr(base.geom, f.name))
                for f in fields(WristGeometry)
            }
        ) if wrist else base.geom

        stiff = parser["stiffness"] if parser.has_section("stiffness") else None
        cal_ref = stiff.get("calibration", "default") if stiff else "default"
        if cal_ref == "default":
            calibration, cal_path = default_calibration(), None
        else:
            cal_file = (path.parent / cal_ref).resolve()
            if not cal_file.is_file():
                raise ConfigError(f"calibration file {cal_file} does not exist")
            calibration, cal_path = load_calibration(cal_file), str(cal_file)
        swab_name = stiff.get("swab", "wood") if stiff else "wood"
        registry = default_swabs()
        if swab_name not in registry:
            raise ConfigError(
                f"unknown swab {swab_name!r}; known: {', '.join(sorted(registry))}"
            )
        pressure = _float(stiff, "pressure_kpa", 0.0) if stiff else 0.0

        ph = parser["phantom"] if parser.has_section("phantom") else None
        phantom = PhantomModel(
            z_throat_mm=_float(ph, "z_throat_mm", base.phantom.z_throat_mm),
            cavity_radius_mm=_float(ph, "cavity_radius_mm", base.phantom.cavity_radius_mm),
            patch_center_mm=(
                _float(ph, "patch_center_x_mm", base.phantom.patch_center_mm[0]),
                _float(ph, "patch_center_y_mm", base.phantom.patch_center_mm[1]),
            ),
            patch_radius_mm=_float(ph, "patch_radius_mm", base.phantom.patch_radius_mm),
        ) if ph else base.phantom

        mp = parser["mapping"] if parser.has_section("mapping") else None
        mapping = MasterMapping(
            k_scale=_float(mp, "k_scale", base.mapping.k_scale),
            axis_map=_parse_axis_map(mp["axis_map"])
            if mp and "axis_map" in mp
            else base.mapping.axis_map,
        ) if mp else base.mapping

        hp = parser["haptics"] if parser.has_section("haptics") else None
        gains = HapticGains(
            k_motion_n_per_mm=_float(hp, "k_motion_n_per_mm", base.gains.k_motion_n_per_mm),
            k_stiffness=_float(hp, "k_stiffness", base.gains.k_stiffness),
        ) if hp else base.gains

        fx = parser["fixture"] if parser.has_section("fixture") else None
        vf_radius = _float(fx, "vf_radius_mm", base.vf_radius_mm) if fx else base.vf_radius_mm

        sv = parser["service"] if parser.has_section("service") else None
        port = sv.getint("port", fallback=base.port) if sv else base.port

        pt = parser["paths"] if parser.has_section("paths") else None
        trace_out = Path(pt.get("trace_out", str(base.trace_out))) if pt else base.trace_out

        return RunConfig(
            geom=geom,
            calibration=calibration,
            calibration_path=cal_path,
            swab=registry[swab_name],
            phantom=phantom,
            mapping=mapping,
            gains=gains,
            pressure_kpa=pressure,
            vf_radius_mm=vf_radius,
            port=port,
            trace_out=trace_out,
        )
    except ConfigError:
        raise
    except (OpswabError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def write_config(config: RunConfig, path: str | Path) -> None:
    """Write a configuration file that load_config parses back."""
    parser = configparser.ConfigParser()
    parser["wrist"] = {
        f.name: repr(getattr(config.geom, f.name)) for f in fields(WristGeometry)
    }
    parser["stiffness"] = {
        "calibration": config.calibration_path or "default",
        "swab": config.swab.name,
        "pressure_kpa": repr(config.pressure_kpa),
    }
    parser["phantom"] = {
        "z_throat_mm": repr(config.phantom.z_throat_mm),
        "cavity_radius_mm": repr(config.phantom.cavity_radius_mm),
        "patch_center_x_mm": repr(config.phantom.patch_center_mm[0]),
        "patch_center_y_mm": repr(config.phantom.patch_center_mm[1]),
        "patch_radius_mm": repr(config.phantom.patch_radius_mm),
    }
    parser["mapping"] = {
        "k_scale": repr(config.mapping.k_scale),
        "axis_map": "  ".join(
            " ".join(str(int(v)) for v in row) for row in config.mapping.axis_map
        ),
    }
    parser["haptics"] = {
        "k_motion_n_per_mm": repr(config.gains.k_motion_n_per_mm),
        "k_stiffness": repr(config.gains.k_stiffness),
    }
    parser["fixture"] = {"vf_radius_mm": repr(config.vf_radius_mm)}
    parser["service"] = {"port": str(config.port)}
    parser["paths"] = {"trace_out": str(config.trace_out)}
    with open(path, "w") as handle:
        parser.write(handle)


def with_trace_out(config: RunConfig, path: str | Path) -> RunConfig:
    return replace(config, trace_out=Path(path))


# ------------------------------------------------- measurement persistence


def load_swabs(path: str | Path) -> dict[str, SwabSpec]:
    """Read a swab registry CSV: name, axial, lateral, length."""
    out: dict[str, SwabSpec] = {}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SWAB_CSV_HEADER:
            raise ConfigError(
                f"swab file {path} must start with header {','.join(SWAB_CSV_HEADER)}"
            )
        for lineno, rec in enumerate(reader, start=2):
            if not rec or not any(f.strip() for f in rec):
                continue
            try:
                out[rec[0].strip()] = SwabSpec(
                    rec[0].strip(), float(rec[1]), float(rec[2]), float(rec[3])
                )
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{path} line {lineno}: {exc}") from exc
    if not out:
        raise ConfigError(f"swab file {path} has no data rows")
    return out


def save_swabs(swabs: Mapping[str, SwabSpec], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SWAB_CSV_HEADER)
        for swab in swabs.values():
            writer.writerow(
                [
                    swab.name,
                    repr(swab.axial_n_per_mm),
                    repr(swab.lateral_n_per_rad),
                    repr(swab.length_mm),
                ]
            )


def load_measured_effective(
    path: str | Path,
) -> tuple[tuple[float, ...], dict[str, dict[str, tuple[float, ...]]]]:
    """Read assembled-pair stiffness measurements.

    One CSV row per (swab, pressure) with the effective axial and lateral
    values.  Every swab must cover the same pressures.  Returns the shared
    pressure grid and the per-swab series, ready for calibration.
    """
    rows: dict[str, list[tuple[float, float, float]]] = {}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MEASURED_CSV_HEADER:
            raise ConfigError(
                f"measurement file {path} must start with header "
                f"{','.join(MEASURED_CSV_HEADER)}"
            )
        for lineno, rec in enumerate(reader, start=2):
            if not rec or not any(f.strip() for f in rec):
                continue
            try:
                rows.setdefault(rec[0].strip(), []).append(
                    (float(rec[1]), float(rec[2]), float(rec[3]))
                )
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{path} line {lineno}: {exc}") from exc
    if not rows:
        raise ConfigError(f"measurement file {path} has no data rows")
    grids = {name: tuple(sorted(p for p, _, _ in series)) for name, series in rows.items()}
    grid = next(iter(grids.values()))
    for name, other in grids.items():
        if other != grid:
            raise ConfigError(
                f"{path}: swab {name!r} covers pressures {other}, expected {grid}"
            )
    measured: dict[str, dict[str, tuple[float, ...]]] = {}
    for name, series in rows.items():
        series.sort(key=lambda rec: rec[0])
        measured[name] = {
            "axial": tuple(axial for _, axial, _ in series),
            "lateral": tuple(lateral for _, _, lateral in series),
        }
    return grid, measured


def save_measured_effective(
    pressures_kpa: Sequence[float],
    measured: Mapping[str, Mapping[str, Sequence[float]]],
    path: str | Path,
) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(MEASURED_CSV_HEADER)
        for name, series in measured.items():
            for pressure, axial, lateral in zip(
                pressures_kpa, series["axial"], series["lateral"]
            ):
                writer.writerow(
                    [name, repr(float(pressure)), repr(float(axial)), repr(float(lateral))]
                )
