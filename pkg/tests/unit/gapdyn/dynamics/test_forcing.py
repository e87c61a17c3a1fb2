# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.


import numpy as np
import pytest

from gapdyn.dynamics.forcing import Constant, PiecewiseLinear, Sinusoid, Zero, forcing_from_dict


def test_sinusoid():
    f = Sinusoid(2.0, 0.5)
    assert f(np.pi) == pytest.approx(2.0)
    assert f.derivative(0.0) == pytest.approx(1.0)


def test_piecewise_linear():
    f = PiecewiseLinear([[10.0, 1.5], [0.0, 0.0]])
    assert f(-1.0) == 0.0
    assert f(5.0) == pytest.approx(0.75)
    assert f(20.0) == pytest.approx(1.5)
    assert f.derivative(5.0) == pytest.approx(0.15)
    assert f.derivative(10.0) == 0.0
    with pytest.raises(ValueError, match="distinct"):
        PiecewiseLinear([[0.0, 1.0], [0.0, 2.0]])


@pytest.mark.parametrize(
    "d, expected",
    [
        (None, Zero()),
        (0, Zero()),
        (0.3, Constant(0.3)),
        ({"type": "constant", "value": 0.3}, Constant(0.3)),
        ({"type": "sinusoid", "amplitude": 2.0, "angular_frequency": 0.5}, Sinusoid(2.0, 0.5)),
    ],
)
def test_forcing_from_dict(d, expected):
    assert forcing_from_dict(d) == expected


def test_forcing_round_trip():
    for f in (Zero(), Constant(1.0), Sinusoid(1.0, 2.0, 0.1), PiecewiseLinear([[0, 0], [1, 2]])):
        assert forcing_from_dict(f.to_dict()) == f


def test_forcing_from_dict_errors():
    with pytest.raises(ValueError, match="unknown forcing"):
        forcing_from_dict({"type": "square"})
    with pytest.raises(ValueError, match="bad parameters"):
        forcing_from_dict({"type": "sinusoid", "amplitude": 1.0})
