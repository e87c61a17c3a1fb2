# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.


import math

import numpy as np
import pytest

from gapdyn.common.python_utils import (
    INF,
    as_vector,
    central_difference,
    ext_scale,
    ext_sum,
    extended_real,
    relative_error,
)

TOL = 1e-8


def test_as_vector():
    assert as_vector(2.0).tolist() == [2.0]
    assert as_vector([1, 2]).dtype == np.float64
    with pytest.raises(ValueError, match="1-D"):
        as_vector([[1.0, 2.0]])
    with pytest.raises(ValueError, match="empty"):
        as_vector([], name="slope")


def test_extended_real():
    assert extended_real(3) == 3.0
    assert extended_real(INF) == INF
    with pytest.raises(ValueError, match="NaN"):
        extended_real(math.nan)
    with pytest.raises(ValueError, match="-inf"):
        extended_real(-INF)


def test_ext_sum_absorbs_infinity():
    assert ext_sum(1.0, 2.0) == 3.0
    assert ext_sum(1.0, INF, -5.0) == INF
    assert ext_sum() == 0.0


def test_ext_scale():
    assert ext_scale(0.0, INF) == 0.0
    assert ext_scale(2.0, INF) == INF
    assert ext_scale(2.0, 1.5) == 3.0
    with pytest.raises(ValueError):
        ext_scale(-1.0, 1.0)


def test_relative_error_floor():
    assert relative_error([1.0], [0.0]) == pytest.approx(1.0)
    assert relative_error([110.0], [100.0]) == pytest.approx(0.1)
    assert relative_error([1e-3], [0.0], floor=1e-3) == pytest.approx(1.0)


def test_central_difference():
    grad = central_difference(lambda x: x[0] ** 2 + 3.0 * x[1], np.array([1.5, -2.0]), 1e-5)
    assert grad == pytest.approx([3.0, 3.0], abs=TOL)
