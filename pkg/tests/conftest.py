from __future__ import annotations

import pytest

from opswab.kinematics import WristGeometry


@pytest.fixture
def geom() -> WristGeometry:
    return WristGeometry()
