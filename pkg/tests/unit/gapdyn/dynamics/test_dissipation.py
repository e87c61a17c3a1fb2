# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.


import math

import numpy as np
import pytest

from gapdyn.common.python_utils import INF
from gapdyn.dynamics.dissipation import (
    Contact,
    Damage,
    Plastic,
    Pure,
    Separable,
    Viscous,
    axioms_check,
    bipotential_equivalence_check,
    bipotential_value,
    grid_minimize,
    information_content,
    law_from_dict,
    likelihood,
    subgradient_inclusion_holds,
    zero_gap_holds,
)
from gapdyn.dynamics.models import ElastoPlastic1D, HarmonicOscillator
from gapdyn.geometry.convex import IndicatorBox, Quadratic, SeparableProduct, Sum, UnsupportedSpecError
from gapdyn.geometry.phase_space import PhaseVector, dual_pairing

TOL = 1e-12
C = 0.2
Y = 0.5


def pv(q, p):
    return PhaseVector(q, p)


def test_pure():
    law = Pure()
    z, z_dot = pv([1.0], [2.0]), pv([0.3], [-0.4])
    assert information_content(law, z, z_dot, PhaseVector.zeros(1)) == 0.0
    assert information_content(law, z, z_dot, pv([0.0], [1e-3])) == INF
    assert likelihood(law, z, z_dot, PhaseVector.zeros(1)) == 1.0
    assert likelihood(law, z, z_dot, pv([1.0], [0.0])) == 0.0


def test_viscous_selected_gap():
    law = Viscous(Quadratic(C))
    z, z_dot = pv([0.0], [1.0]), pv([1.5], [-0.7])
    assert information_content(law, z, z_dot, pv([0.0], [C * 1.5])) == pytest.approx(0.0, abs=TOL)
    # (eta_p - c v)^2 / (2c) off the selection
    assert information_content(law, z, z_dot, pv([0.0], [C * 1.5 + 0.1])) == pytest.approx(0.01 / (2 * C))
    assert information_content(law, z, z_dot, pv([0.1], [C * 1.5])) == INF


def test_viscous_likelihood():
    law = Viscous(Quadratic(C))
    z, z_dot = pv([0.0], [1.0]), pv([1.0], [0.0])
    eta = pv([0.0], [C + 0.2])
    assert likelihood(law, z, z_dot, eta) == pytest.approx(math.exp(-0.04 / (2 * C)))


@pytest.mark.parametrize(
    "sigma, rate, expected",
    [(1.0, 0.3, 0.0), (-1.0, -0.3, 0.0), (0.5, 0.0, 0.0), (0.5, 0.3, 0.15), (1.5, 0.0, INF), (1.0, -0.3, 0.6)],
)
def test_plastic_flow_rule(sigma, rate, expected):
    law = Plastic.from_yield_stress(1.0)
    z = pv([0.0, 0.0], [0.0, 0.0])
    z_dot = pv([0.2, rate], [0.1, sigma])
    eta = pv([0.0, rate], [0.0, 0.0])
    assert information_content(law, z, z_dot, eta) == pytest.approx(expected, abs=TOL)


def test_plastic_gap_only_in_internal_slot():
    law = Plastic.from_yield_stress(1.0)
    z, z_dot = PhaseVector.zeros(2), pv([0.0, 0.0], [0.0, 0.5])
    assert information_content(law, z, z_dot, pv([0.1, 0.0], [0.0, 0.0])) == INF


@pytest.mark.parametrize(
    "d_dot, eta_r, expected",
    [(0.2, Y, 0.0), (0.0, 0.1, 0.0), (0.2, 0.1, 0.08), (-0.1, 0.0, INF), (0.0, Y + 0.1, INF)],
)
def test_damage(d_dot, eta_r, expected):
    law = Damage(Y)
    z = pv([1.0, 0.3], [0.0, 0.0])
    z_dot = pv([0.5, d_dot], [0.1, 0.0])
    eta = pv([0.0, 0.0], [0.0, eta_r])
    assert information_content(law, z, z_dot, eta) == pytest.approx(expected, abs=TOL)


def test_damage_bounds_and_saturation():
    law = Damage(Y)
    z_dot = pv([0.0, 0.0], [0.0, 0.0])
    eta = pv([0.0, 0.0], [0.0, 0.0])
    assert information_content(law, pv([0.0, 1.2], [0.0, 0.0]), z_dot, eta) == INF
    saturated = pv([1.0, 1.0], [0.0, 0.0])
    assert law.is_saturated(saturated)
    assert information_content(law, saturated, z_dot, pv([0.0, 0.0], [0.0, 5.0])) == INF
    assert information_content(law, saturated, pv([0.0, 0.1], [0.0, 0.0]), pv([0.0, 0.0], [0.0, Y])) == pytest.approx(0.0)
    assert information_content(law, saturated, pv([0.0, 0.1], [0.0, 0.0]), eta) == pytest.approx(0.1 * Y)


def test_contact(ball):
    law = Contact(ball.constraint)
    polar_law = Contact(ball.constraint, form="polar")
    rest, reaction = pv([0.0], [0.0]), pv([0.0], [-2.0])
    cases = [
        (rest, pv([0.0], [0.0]), reaction, 0.0),
        (rest, pv([1.0], [0.0]), reaction, 2.0),
        (rest, pv([-1.0], [0.0]), reaction, INF),
        (rest, pv([0.0], [0.0]), pv([0.0], [1.0]), INF),
        (pv([-0.1], [0.0]), pv([0.0], [0.0]), PhaseVector.zeros(1), INF),
        (pv([1.0], [0.0]), pv([-1.0], [0.0]), pv([0.0], [-1.0]), INF),
        (pv([1.0], [0.0]), pv([-1.0], [0.0]), PhaseVector.zeros(1), 0.0),
    ]
    for z, z_dot, eta, expected in cases:
        assert information_content(law, z, z_dot, eta) == pytest.approx(expected)
        assert information_content(polar_law, z, z_dot, eta) == information_content(law, z, z_dot, eta)


def test_contact_rejects_bad_arguments(ball):
    with pytest.raises(ValueError, match="form"):
        Contact(ball.constraint, form="dual")
    with pytest.raises(ValueError, match="restitution"):
        Contact(ball.constraint, restitution=1.5)


def test_bipotential_value():
    law = Viscous(Quadratic(C))
    z, z_dot, eta = pv([0.0], [1.0]), pv([1.5], [0.0]), pv([0.0], [0.5])
    expected = information_content(law, z, z_dot, eta) + dual_pairing(z_dot, eta)
    assert bipotential_value(law, z, z_dot, eta) == pytest.approx(expected)
    assert bipotential_value(law, z, z_dot, pv([1.0], [0.5])) == INF


def test_zero_gap_matches_inclusion(rng):
    law = Viscous(Quadratic(C))
    for _ in range(50):
        z = pv(rng.normal(size=1), rng.normal(size=1))
        z_dot = pv(rng.normal(size=1), rng.normal(size=1))
        for eta_p in (C * z_dot.q[0], rng.normal()):
            eta = pv([0.0], [eta_p])
            assert zero_gap_holds(law, z, z_dot, eta) == subgradient_inclusion_holds(law, z, z_dot, eta)


def test_shape_checks():
    law = Pure()
    with pytest.raises(ValueError, match="shape mismatch"):
        information_content(law, PhaseVector.zeros(1), PhaseVector.zeros(2), PhaseVector.zeros(1))
    with pytest.raises(ValueError, match="PhaseVector"):
        information_content(law, PhaseVector.zeros(1), [0.0, 0.0], PhaseVector.zeros(1))


def test_separable_needs_closed_form_polar():
    with pytest.raises(UnsupportedSpecError):
        Separable(SeparableProduct([(Sum([Quadratic(1.0), IndicatorBox(-1.0, 1.0)]), (0,)), (Quadratic(1.0), (1,))]))
    with pytest.raises(ValueError, match="even"):
        Separable(Quadratic(1.0))


def test_check_model():
    with pytest.raises(TypeError, match="layout"):
        Plastic.from_yield_stress(1.0).check_model(HarmonicOscillator())
    with pytest.raises(TypeError, match="layout"):
        Viscous(Quadratic(C)).check_model(ElastoPlastic1D())
    Pure().check_model(ElastoPlastic1D())


@pytest.mark.parametrize(
    "d, expected",
    [
        ({"type": "pure"}, Pure()),
        ({"type": "viscous", "c": 0.2}, Viscous(Quadratic(0.2))),
        ({"type": "viscous", "phi": {"type": "quadratic", "a": 0.2}}, Viscous(Quadratic(0.2))),
        ({"type": "plastic", "yield_stress": 1.0}, Plastic.from_yield_stress(1.0)),
        ({"type": "damage", "Y": 0.5}, Damage(0.5)),
    ],
)
def test_law_from_dict(d, expected):
    assert law_from_dict(d) == expected


def test_law_from_dict_contact(ball):
    law = law_from_dict({"type": "contact", "restitution": 0.5}, ball)
    assert law.M == ball.constraint
    assert law.restitution == 0.5
    assert law_from_dict(law.to_dict()) == law
    with pytest.raises(ValueError, match="constraints"):
        law_from_dict({"type": "contact"})


def test_law_from_dict_errors():
    with pytest.raises(ValueError, match="unknown law"):
        law_from_dict({"type": "friction"})
    with pytest.raises(ValueError, match="missing parameter"):
        law_from_dict({"type": "damage"})


def test_grid_minimize():
    grid, values, best_x, best_value = grid_minimize(lambda x: (x[0] - 0.123) ** 2, 1, -1.0, 1.0, 21)
    assert grid.shape == (21, 1)
    assert values.shape == (21,)
    assert best_x[0] == pytest.approx(0.123, abs=1e-6)
    assert best_value == pytest.approx(0.0, abs=1e-10)


def test_grid_minimize_two_coordinates():
    _, _, best_x, _ = grid_minimize(lambda x: (x[0] - 0.3) ** 2 + (x[1] + 0.2) ** 2, 2, -1.0, 1.0, 11)
    assert best_x == pytest.approx([0.3, -0.2], abs=1e-4)


@pytest.mark.parametrize("name", ["pure", "viscous", "plastic", "damage", "contact"])
def test_axioms_check(laws, name):
    # rate minimizers eta_p/a must stay on the search grid
    law = Viscous(Quadratic(0.5)) if name == "viscous" else laws[name]
    report = axioms_check(law, sample_count=100, infimum_samples=3, grid_points=21)
    assert report.ok, report.to_dict()
    assert sum(report.convexity_samples.values()) > 0


def test_axioms_contact_exempts_rate_slot(laws):
    report = axioms_check(laws["contact"], sample_count=10, infimum_samples=1, grid_points=11)
    assert report.exempt == ["slot2"]
    assert report.notes


def test_bipotential_equivalence_check(rng):
    law = Viscous(Quadratic(C))
    z, z_dot = pv([0.0], [1.0]), pv([1.5], [0.3])
    result = bipotential_equivalence_check(law, z, z_dot, pv([0.0], [C * 1.5]), probes=50, rng=rng)
    assert result == {"zero_gap": True, "slot2_failures": 0, "slot3_failures": 0, "probes": 50}
    off = bipotential_equivalence_check(law, z, z_dot, pv([0.0], [1.0]), rng=rng)
    assert off["zero_gap"] is False
