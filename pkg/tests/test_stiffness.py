from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opswab.errors import (
    ConfigError,
    InconsistentDataError,
    OutOfCalibrationRangeError,
    OutOfRangeError,
)
from opswab.stiffness import (
    CAL_PRESSURES_KPA,
    F_SAFETY_N,
    MEASURED_EFFECTIVE,
    CalibrationTable,
    StiffnessPair,
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

# ---------------------------------------------------------------------------
# independent oracle: solve the series relation by bisection
# ---------------------------------------------------------------------------


def oracle_invert(k_eff: float, k_swab: float) -> float:
    """Find k_w with k_w*k_s/(k_w+k_s) = k_eff by bisection, no algebra."""
    lo, hi = k_eff, 1e9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * k_swab / (mid + k_swab) < k_eff:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# frozen once from the oracle
FROZEN_WOOD_AXIAL_90 = 11.9029
FROZEN_PLASTIC_AXIAL_90 = 16.6463
FROZEN_DEFAULT_AXIAL = (3.638094, 6.499561, 9.288767, 11.872978)
FROZEN_DEFAULT_LATERAL = (56.975507, 90.424492, 110.355431, 131.518599)


def test_inversion_matches_bisection_oracle() -> None:
    swabs = default_swabs()
    for name in ("wood", "metal"):
        for axis in ("axial", "lateral"):
            k_swab = (
                swabs[name].axial_n_per_mm
                if axis == "axial"
                else swabs[name].lateral_n_per_rad
            )
            for k_eff in MEASURED_EFFECTIVE[name][axis]:
                assert invert_effective(k_eff, k_swab) == pytest.approx(
                    oracle_invert(k_eff, k_swab), rel=1e-9
                )


def test_frozen_inversion_values() -> None:
    swabs = default_swabs()
    assert invert_effective(6.269, swabs["wood"].axial_n_per_mm) == pytest.approx(
        FROZEN_WOOD_AXIAL_90, abs=1e-3
    )
    assert invert_effective(1.193, swabs["plastic"].axial_n_per_mm) == pytest.approx(
        FROZEN_PLASTIC_AXIAL_90, abs=1e-3
    )


def test_inversion_rejects_effective_at_or_above_swab() -> None:
    with pytest.raises(InconsistentDataError):
        invert_effective(1.3, 1.2851)
    with pytest.raises(InconsistentDataError):
        invert_effective(1.2851, 1.2851)
    with pytest.raises(OutOfRangeError):
        invert_effective(-1.0, 2.0)


# ---------------------------------------------------------------------------
# shipped calibration
# ---------------------------------------------------------------------------


def test_default_calibration_frozen_values() -> None:
    table = default_calibration()
    assert table.pressures_kpa == CAL_PRESSURES_KPA
    for got, want in zip(table.axial_n_per_mm, FROZEN_DEFAULT_AXIAL):
        assert got == pytest.approx(want, abs=1e-5)
    for got, want in zip(table.lateral_n_per_rad, FROZEN_DEFAULT_LATERAL):
        assert got == pytest.approx(want, abs=1e-5)


def test_default_calibration_reproduces_wood_and_metal_within_5pct() -> None:
    table = default_calibration()
    swabs = default_swabs()
    for name in ("wood", "metal"):
        for axis in ("axial", "lateral"):
            for pressure, want in zip(CAL_PRESSURES_KPA, MEASURED_EFFECTIVE[name][axis]):
                pair = effective_stiffness(wrist_stiffness(table, pressure), swabs[name])
                got = pair.axial_n_per_mm if axis == "axial" else pair.lateral_n_per_rad
                assert abs(got - want) / want <= 0.05


def test_default_calibration_monotone_in_pressure() -> None:
    table = default_calibration()
    assert list(table.axial_n_per_mm) == sorted(table.axial_n_per_mm)
    assert list(table.lateral_n_per_rad) == sorted(table.lateral_n_per_rad)


def test_calibration_from_all_swabs_drops_plastic_axial_keeps_lateral() -> None:
    result = calibrate_from_effective(
        CAL_PRESSURES_KPA, MEASURED_EFFECTIVE, default_swabs()
    )
    assert any("plastic axial" in line for line in result.excluded)
    assert not any("plastic lateral" in line for line in result.excluded)
    # axial column identical to the wood+metal-only fit
    default = default_calibration()
    for got, want in zip(result.table.axial_n_per_mm, default.axial_n_per_mm):
        assert got == pytest.approx(want, rel=1e-12)
    # lateral column now averages three consistent swabs
    assert result.table.lateral_n_per_rad != default.lateral_n_per_rad
    for got, want in zip(result.table.lateral_n_per_rad, default.lateral_n_per_rad):
        assert got == pytest.approx(want, rel=0.02)
    assert max(result.spread["axial"]) < 0.005
    assert max(result.spread["lateral"]) < 0.03


def test_calibration_fails_when_no_row_usable() -> None:
    # measured effective above the swab's own stiffness on every row
    measured = {"floppy": {"axial": (2.0, 2.1), "lateral": (2.0, 2.1)}}
    swabs = {"floppy": default_swabs()["plastic"]}
    with pytest.raises(InconsistentDataError):
        calibrate_from_effective((0.0, 30.0), measured, swabs)


# ---------------------------------------------------------------------------
# interpolation and extrapolation
# ---------------------------------------------------------------------------


def test_interpolation_exact_at_knots_and_linear_between() -> None:
    table = default_calibration()
    at_knot = wrist_stiffness(table, 30.0)
    assert at_knot.axial_n_per_mm == pytest.approx(table.axial_n_per_mm[1])
    mid = wrist_stiffness(table, 45.0)
    assert mid.axial_n_per_mm == pytest.approx(
        0.5 * (table.axial_n_per_mm[1] + table.axial_n_per_mm[2])
    )
    assert mid.lateral_n_per_rad == pytest.approx(
        0.5 * (table.lateral_n_per_rad[1] + table.lateral_n_per_rad[2])
    )


def test_extrapolation_uses_edge_slope_within_margin() -> None:
    table = default_calibration()
    high = wrist_stiffness(table, 100.0)
    slope = (table.axial_n_per_mm[3] - table.axial_n_per_mm[2]) / 30.0
    assert high.axial_n_per_mm == pytest.approx(table.axial_n_per_mm[3] + 10.0 * slope)
    low = wrist_stiffness(table, -10.0)
    slope_lo = (table.axial_n_per_mm[1] - table.axial_n_per_mm[0]) / 30.0
    assert low.axial_n_per_mm == pytest.approx(table.axial_n_per_mm[0] - 10.0 * slope_lo)


def test_pressure_outside_margin_rejected() -> None:
    table = default_calibration()
    with pytest.raises(OutOfCalibrationRangeError):
        wrist_stiffness(table, 100.5)
    with pytest.raises(OutOfCalibrationRangeError):
        wrist_stiffness(table, -10.5)


def test_chamber_pressure_range() -> None:
    check_pressure(-30.0)
    check_pressure(90.0)
    with pytest.raises(OutOfRangeError):
        check_pressure(-30.1)
    with pytest.raises(OutOfRangeError):
        check_pressure(90.1)


# ---------------------------------------------------------------------------
# series composition
# ---------------------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(
    k_wrist=st.floats(0.1, 1e4),
    k_swab=st.floats(0.1, 1e4),
)
def test_series_below_both_springs(k_wrist: float, k_swab: float) -> None:
    swab = default_swabs()["wood"]
    pair = effective_stiffness(
        StiffnessPair(k_wrist, k_wrist),
        type(swab)(swab.name, k_swab, k_swab, swab.length_mm),
    )
    assert 0.0 < pair.axial_n_per_mm < min(k_wrist, k_swab)
    assert 0.0 < pair.lateral_n_per_rad < min(k_wrist, k_swab)


def test_series_frozen_example() -> None:
    # stiffest default setting with the plastic swab
    pair = effective_stiffness(
        wrist_stiffness(default_calibration(), 90.0), default_swabs()["plastic"]
    )
    assert pair.axial_n_per_mm == pytest.approx(1.1597, abs=1e-3)


def test_safe_deflection_at_reported_plastic_stiffness() -> None:
    assert safe_deflection(1.193, F_SAFETY_N) == pytest.approx(0.4929, abs=1e-4)
    with pytest.raises(OutOfRangeError):
        safe_deflection(0.0)


# ---------------------------------------------------------------------------
# persistence and validation
# ---------------------------------------------------------------------------


def test_csv_roundtrip(tmp_path) -> None:
    table = default_calibration()
    path = tmp_path / "cal.csv"
    save_calibration(table, path)
    back = load_calibration(path)
    assert back.pressures_kpa == table.pressures_kpa
    for got, want in zip(back.axial_n_per_mm, table.axial_n_per_mm):
        assert got == pytest.approx(want, rel=1e-8)


def test_csv_header_enforced(tmp_path) -> None:
    path = tmp_path / "bad.csv"
    path.write_text("pressure,axial,lateral\n0,1,2\n")
    with pytest.raises(ConfigError):
        load_calibration(path)


def test_table_validation() -> None:
    with pytest.raises(ConfigError):
        CalibrationTable((0.0,), (1.0,), (1.0,))
    with pytest.raises(ConfigError):
        CalibrationTable((0.0, 0.0), (1.0, 1.0), (1.0, 1.0))
    with pytest.raises(ConfigError):
        CalibrationTable((0.0, 30.0), (1.0, -1.0), (1.0, 1.0))
