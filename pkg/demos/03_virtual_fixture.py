"""
The hybrid virtual fixture
==========================

During sampling the operator's commanded tool motion is projected onto a
feasible set shaped like the throat opening: a disk in (x, y) and an
arc-length bound along insertion sized so the contact force can never pass
the comfort budget.  Violations are rendered back to the master hand as
spring forces.
"""

import numpy as np

from opswab import (
    ConfigState,
    FixtureSpec,
    HapticGains,
    WristGeometry,
    arc_endpoint,
    default_calibration,
    default_swabs,
    effective_stiffness,
    master_force,
    motion_force,
    numeric_jacobian,
    project,
    stiffness_force,
    wrist_stiffness,
    MasterMapping,
    F_SAFETY_N,
)

geom = WristGeometry()
rest = ConfigState(0.0, 0.0, 65.0)

# the fixture anchors where the trigger was pressed: arc endpoint + arc length
k_axial = effective_stiffness(wrist_stiffness(default_calibration(), 0.0),
                              default_swabs()["wood"]).axial_n_per_mm
fx = FixtureSpec(
    origin_mm=arc_endpoint(rest, geom),
    r_throat_mm=20.0,
    l_button_mm=65.0,
    k_axial_effective_n_per_mm=k_axial,
)
print(f"anchored at {fx.origin_mm}, radius {fx.r_throat_mm} mm")
print(f"arc-length bound {fx.length_bound_mm():.3f} mm "
      f"(= 65 + {F_SAFETY_N}/{k_axial:.3f})")

# a command inside the set passes through unchanged
inside = np.array([3.0, 0.0, 0.05])
r = project(inside, fx, rest, geom)
print(f"\ncommand {inside} -> {np.round(r.delta_cmd_mm, 6)} (untouched)")

# sideways overdrive is clamped radially onto the disk
wide = np.array([25.0, 15.0, 0.0])
r = project(wide, fx, rest, geom)
print(f"command {wide} -> {np.round(r.delta_cmd_mm, 3)}  "
      f"motion violation {np.round(r.motion_violation_mm, 3)} mm")

# deep overdrive is retracted until the arc length respects the bound
deep = np.array([0.0, 0.0, 4.0])
r = project(deep, fx, rest, geom)
print(f"command {deep} -> {np.round(r.delta_cmd_mm, 4)}  "
      f"(depth {r.delta_cmd_mm[2]:.4f} vs bound headroom {fx.length_bound_mm() - 65.0:.4f})")

# violations become operator-side forces through the haptic gains
gains = HapticGains()
f_motion = motion_force(r.motion_violation_mm, gains)
f_cfg = stiffness_force(r.stiffness_violation, gains)
force = master_force(f_motion, f_cfg, numeric_jacobian(rest, geom), MasterMapping())
print(f"\nhaptic echo for the deep push: {np.round(force.master_force_n, 4)} N "
      f"(capped at {force.capped})")
