"""Coordinate mapping between the operator console and the wrist.

The master device and the wrist do not share an axis order: the console's
x runs along the wrist's y, and its z points against insertion.  Commanded
increments are scaled down by ``k_scale`` and re-ordered through a signed
permutation matrix; reaction forces travel the opposite way through the
transpose (without the motion scale, so a newton felt is a newton applied).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRangeError

# operator x -> wrist y, operator y -> wrist x, operator z -> minus wrist z
DEFAULT_AXIS_MAP = ((0.0, 1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, -1.0))


def _as_matrix(rows: tuple[tuple[float, float, float], ...]) -> np.ndarray:
    m = np.array(rows, dtype=float)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class MasterMapping:
    """Motion scale and axis permutation between master and slave frames."""

    k_scale: float = 2.0
    axis_map: np.ndarray = field(
        default_factory=lambda: _as_matrix(DEFAULT_AXIS_MAP)
    )

    def __post_init__(self) -> None:
        if self.k_scale <= 0.0:
            raise OutOfRangeError("k_scale must be positive")
        m = np.asarray(self.axis_map, dtype=float)
        if m.shape != (3, 3):
            raise OutOfRangeError("axis_map must be a 3x3 matrix")
        ok = (
            np.all(np.isin(m, (-1.0, 0.0, 1.0)))
            and np.all(np.count_nonzero(m, axis=0) == 1)
            and np.all(np.count_nonzero(m, axis=1) == 1)
        )
        if not ok:
            raise OutOfRangeError("axis_map must be a signed permutation matrix")
        # callers may pass nested tuples (config files do); store one canonical form
        m.setflags(write=False)
        object.__setattr__(self, "axis_map", m)


def map_master_delta(delta_m_mm: np.ndarray, mapping: MasterMapping) -> np.ndarray:
    """Scale and re-order a master increment into the slave task frame."""
    return (mapping.axis_map @ np.asarray(delta_m_mm, dtype=float)) / mapping.k_scale
