"""
Pressure-tunable stiffness and the series swab model
====================================================

The wrist encloses a pneumatic chamber: more pressure, stiffer wrist.  A
mounted swab adds its own compliance in series, so what the throat feels is
k_eff = k_wrist * k_swab / (k_wrist + k_swab).  The calibration table below
was fitted from bench measurements of assembled pairs.
"""

from opswab import (
    CAL_PRESSURES_KPA,
    F_SAFETY_N,
    default_calibration,
    default_swabs,
    effective_stiffness,
    safe_deflection,
    wrist_stiffness,
)

table = default_calibration()
print("wrist-only calibration (axial N/mm, lateral N/rad):")
for p, ka, kl in zip(table.pressures_kpa, table.axial_n_per_mm, table.lateral_n_per_rad):
    print(f"  {p:5.1f} kPa   {ka:7.3f}   {kl:8.2f}")

# between calibrated pressures the table interpolates linearly
mid = wrist_stiffness(table, 45.0)
print(f"\nat 45 kPa (interpolated): axial {mid.axial_n_per_mm:.3f} N/mm")

swabs = default_swabs()
print("\neffective stiffness with each swab mounted, 0 -> 90 kPa:")
for name, swab in swabs.items():
    row = []
    for p in CAL_PRESSURES_KPA:
        k = effective_stiffness(wrist_stiffness(table, p), swab)
        row.append(f"{k.axial_n_per_mm:6.3f}")
    print(f"  {name:8s} {' '.join(row)}  N/mm")

# the soft plastic swab barely changes with pressure: its own compliance
# dominates the series chain. The metal swab tracks the wrist closely.

# comfort budget: the fixture sizes its motion bound so that worst-case
# deflection times effective stiffness stays under F_SAFETY_N
print(f"\ncomfort force budget {F_SAFETY_N} N")
for name in ("plastic", "wood", "metal"):
    k = effective_stiffness(wrist_stiffness(table, 90.0), swabs[name])
    d = safe_deflection(k.axial_n_per_mm)
    print(f"  {name:8s} at 90 kPa: {d:.3f} mm of travel headroom")
