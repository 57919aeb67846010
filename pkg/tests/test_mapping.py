"""Master-to-slave coordinate mapping tests."""

from __future__ import annotations

import numpy as np
import pytest

from opswab.errors import OutOfRangeError
from opswab.mapping import DEFAULT_AXIS_MAP, MasterMapping, map_master_delta


def test_default_axis_map_is_orthogonal_signed_permutation() -> None:
    m = np.array(DEFAULT_AXIS_MAP)
    np.testing.assert_allclose(m @ m.T, np.eye(3), atol=0.0)
    assert sorted(np.abs(m).sum(axis=0).tolist()) == [1.0, 1.0, 1.0]


def test_worked_delta_example() -> None:
    # operator moves (2, 4, -6) mm; scale 2 and axis swap give (2, 1, 3)
    out = map_master_delta(np.array([2.0, 4.0, -6.0]), MasterMapping())
    np.testing.assert_allclose(out, [2.0, 1.0, 3.0], atol=1e-12)


def test_scale_one_is_pure_axis_swap() -> None:
    mapping = MasterMapping(k_scale=1.0)
    out = map_master_delta(np.array([1.0, 0.0, 0.0]), mapping)
    np.testing.assert_allclose(out, [0.0, 1.0, 0.0], atol=0.0)


def test_mapping_is_linear() -> None:
    mapping = MasterMapping()
    rng = np.random.default_rng(7)
    u, v = rng.normal(size=3), rng.normal(size=3)
    lhs = map_master_delta(2.0 * u + v, mapping)
    rhs = 2.0 * map_master_delta(u, mapping) + map_master_delta(v, mapping)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_rejects_nonpositive_scale() -> None:
    with pytest.raises(OutOfRangeError):
        MasterMapping(k_scale=0.0)


def test_rejects_non_permutation_matrices() -> None:
    with pytest.raises(OutOfRangeError):
        MasterMapping(axis_map=np.array([[0.0, 2.0, 0.0], [1, 0, 0], [0, 0, -1]]))
    with pytest.raises(OutOfRangeError):
        # doubled column
        MasterMapping(axis_map=np.array([[1.0, 0, 0], [1, 0, 0], [0, 0, 1]]))
    with pytest.raises(OutOfRangeError):
        MasterMapping(axis_map=np.eye(2))
