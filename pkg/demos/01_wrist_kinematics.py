"""
Cable-driven wrist kinematics
=============================

The wrist is a single bendable segment driven by three cables.  Its
configuration is (alpha, beta, l): the bend-plane azimuth, the bend angle
and the arc length.  This walk-through moves between the three spaces
(cables, configuration, tool point) and samples the reachable envelope.
"""

import numpy as np

from opswab import (
    ActuatorLengths,
    ConfigState,
    WristGeometry,
    actuator_to_config,
    config_to_actuator,
    config_to_tip,
    tip_to_config,
    arc_endpoint,
    workspace_sample,
    HUMAN_WRIST_TRAVEL_MM,
)

geom = WristGeometry()
print(f"cable travel [{geom.cable_min_mm}, {geom.cable_max_mm}] mm, "
      f"pitch radius {geom.cable_pitch_mm} mm, tool offset {geom.tip_offset_mm} mm")

# straight pose: all cables at the rest length
q0 = actuator_to_config(ActuatorLengths(65.0, 65.0, 65.0), geom)
print(f"\nequal cables -> alpha {q0.alpha_rad:.3f}, beta {q0.beta_rad:.3f}, l {q0.length_mm:.1f}")

# shorten one side: the wrist bends toward the short cable
bent = actuator_to_config(ActuatorLengths(59.0, 68.0, 68.0), geom)
print(f"59/68/68 mm   -> alpha {bent.alpha_rad:.4f}, beta {bent.beta_rad:.4f}, l {bent.length_mm:.1f}")

# the mapping is exactly invertible
back = config_to_actuator(bent, geom)
print(f"inverse gives  {back.l1_mm:.6f}, {back.l2_mm:.6f}, {back.l3_mm:.6f}")

# where does the tool point end up?
tip = config_to_tip(bent, geom)
print(f"\ntool point at {np.round(tip.position_mm, 2)} (orientation is a proper rotation, "
      f"det {np.linalg.det(tip.orientation):.6f})")

# inverse kinematics recovers the configuration from a centerline target
target = arc_endpoint(ConfigState(0.8, 0.6, 70.0), geom)
q = tip_to_config(target, geom)
print(f"centerline target {np.round(target, 3)} solved as "
      f"alpha {q.alpha_rad:.4f}, beta {q.beta_rad:.4f}, l {q.length_mm:.4f}")

# reachable envelope against a human wrist
points, extents = workspace_sample(geom)
print(f"\n{len(points)} grid poses reachable; extents (mm):")
for axis, (lo, hi) in extents.items():
    print(f"  {axis}: [{lo:7.2f}, {hi:7.2f}]  span {hi - lo:6.1f}")
print("human wrist travel for scale:", HUMAN_WRIST_TRAVEL_MM)
