# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.


import numpy as np
import pytest

from gapdyn.common.python_utils import INF
from gapdyn.geometry.convex import (
    IndicatorBox,
    IndicatorPoint,
    Linear,
    Quadratic,
    SeparableProduct,
    SubdifferentialQuery,
    Sum,
    SupportBox,
    UnsupportedSpecError,
    conjugate_comparison,
    convex_spec_from_dict,
    cyclically_monotone_check,
    evaluate,
    fenchel_gap,
    n_monotone_check,
    numerical_conjugate,
    polar,
    prox,
    subgradient_contains,
    uniform_grid,
    with_tolerance,
)

TOL = 1e-9


@pytest.fixture(scope="module")
def specs():
    return {
        "quadratic": Quadratic(1.0),
        "quadratic_shifted": Quadratic(2.0, 0.5),
        "linear": Linear(0.7),
        "indicator_point": IndicatorPoint(0.0),
        "indicator_box": IndicatorBox(-1.0, 1.0),
        "support_box": SupportBox.symmetric(1.0),
        "damage_potential": Sum([IndicatorBox(0.0, INF), Linear(0.5)]),
    }


def test_values():
    assert evaluate(Quadratic(2.0, 1.0), [3.0]) == pytest.approx(4.0)
    assert evaluate(Linear([1.0, -1.0]), [2.0, 3.0]) == pytest.approx(-1.0)
    assert evaluate(IndicatorPoint(0.0), [0.0]) == 0.0
    assert evaluate(IndicatorPoint(0.0), [1e-3]) == INF
    assert evaluate(IndicatorBox(-1.0, 1.0), [1.0]) == 0.0
    assert evaluate(IndicatorBox(-1.0, 1.0), [1.5]) == INF
    assert evaluate(SupportBox.symmetric(2.0, dim=2), [1.0, -3.0]) == pytest.approx(8.0)
    assert evaluate(SupportBox(0.0, INF, shift=0.5), [0.4]) == 0.0
    assert evaluate(SupportBox(0.0, INF, shift=0.5), [0.6]) == INF


def test_evaluate_checks_dimension():
    with pytest.raises(ValueError, match="dimension"):
        evaluate(Quadratic(1.0), [1.0, 2.0])


def test_invalid_specs():
    with pytest.raises(ValueError, match="a > 0"):
        Quadratic(0.0)
    with pytest.raises(ValueError, match="empty"):
        IndicatorBox(1.0, -1.0)
    with pytest.raises(ValueError, match="same dimension|share one dimension"):
        Sum([Quadratic(1.0), Linear([1.0, 2.0])])
    with pytest.raises(ValueError, match="partition"):
        SeparableProduct([(Quadratic(1.0), (0,)), (Quadratic(1.0), (2,))])


@pytest.mark.parametrize(
    "f, expected",
    [
        (Quadratic(2.0), Quadratic(0.5)),
        (Linear(0.7), IndicatorPoint(0.7)),
        (IndicatorPoint(0.3), Linear(0.3)),
        (IndicatorBox(-1.0, 2.0), SupportBox(-1.0, 2.0)),
        (SupportBox(-1.0, 2.0), IndicatorBox(-1.0, 2.0)),
        (Sum([Quadratic(2.0), Linear(1.0)]), Quadratic(0.5, 1.0)),
        (Sum([IndicatorBox(0.0, INF), Linear(0.5)]), SupportBox(0.0, INF, shift=0.5)),
    ],
)
def test_polar_closed_forms(f, expected):
    assert polar(f) == expected


def test_polar_is_involution(specs, rng):
    ys = rng.uniform(-3.0, 3.0, 50)
    for name in ("quadratic", "linear", "indicator_box", "support_box"):
        f = specs[name]
        ff = polar(polar(f))
        for y in ys:
            assert evaluate(ff, [y]) == pytest.approx(evaluate(f, [y]), abs=TOL)


def test_unsupported_polar():
    f = Sum([Quadratic(1.0), IndicatorBox(-1.0, 1.0)])
    with pytest.raises(UnsupportedSpecError):
        polar(f)


def test_fenchel_inequality(specs, rng):
    for name, f in specs.items():
        f_star = polar(f)
        for x, y in rng.uniform(-5.0, 5.0, (200, 2)):
            assert fenchel_gap(f, [x], [y], f_star) >= -TOL, name


def test_fenchel_equality_on_subgradients(specs, rng):
    for name, f in specs.items():
        for v in rng.uniform(-5.0, 5.0, 50):
            x = prox(f, [v], 1.0)
            y = np.array([v]) - x
            assert fenchel_gap(f, x, y) <= TOL, name
            assert subgradient_contains(f, x, y), name


def test_subgradient_contains():
    box = IndicatorBox(-1.0, 1.0)
    assert subgradient_contains(box, [1.0], [3.0])
    assert not subgradient_contains(box, [1.0], [-3.0])
    assert subgradient_contains(box, [0.2], [0.0])
    assert not subgradient_contains(box, [0.2], [0.1])
    assert not subgradient_contains(box, [2.0], [1.0])
    support = SupportBox.symmetric(1.0)
    assert subgradient_contains(support, [0.0], [0.5])
    assert subgradient_contains(support, [2.0], [1.0])
    assert not subgradient_contains(support, [2.0], [0.5])
    assert SubdifferentialQuery([0.0], [0.5]).holds_for(support)


def test_prox(specs):
    assert prox(Quadratic(1.0), [2.0], 1.0) == pytest.approx([1.0])
    assert prox(IndicatorBox(-1.0, 1.0), [3.0], 0.5) == pytest.approx([1.0])
    # soft thresholding
    assert prox(SupportBox.symmetric(1.0), [3.0], 2.0) == pytest.approx([1.0])
    assert prox(SupportBox.symmetric(1.0), [-1.5], 2.0) == pytest.approx([0.0])
    with pytest.raises(ValueError, match="lambda"):
        prox(Quadratic(1.0), [1.0], 0.0)


def test_separable_product():
    f = SeparableProduct([(Quadratic(1.0), (0,)), (IndicatorBox(-1.0, 1.0), (1,))])
    assert f.dim == 2
    assert evaluate(f, [2.0, 0.5]) == pytest.approx(2.0)
    assert evaluate(f, [2.0, 1.5]) == INF
    assert polar(f) == SeparableProduct([(Quadratic(1.0), (0,)), (SupportBox(-1.0, 1.0), (1,))])


def test_with_tolerance():
    point = with_tolerance(IndicatorPoint(0.0), 1e-9)
    assert evaluate(point, [5e-10]) == 0.0
    assert evaluate(point, [1e-8]) == INF
    quadratic = Quadratic(1.0)
    assert with_tolerance(quadratic, 1e-9) is quadratic


def test_uniform_grid():
    xs = uniform_grid(-1.0, 1.0, 5)
    assert xs.tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    with pytest.raises(ValueError):
        uniform_grid(1.0, -1.0, 5)
    with pytest.raises(ValueError):
        uniform_grid(-1.0, 1.0, 1)


def test_numerical_conjugate_quadratic():
    table = numerical_conjugate(Quadratic(1.0), -5.0, 5.0, 1001)
    inner = table[np.abs(table["y"]) <= 4.0]
    assert inner["f_star_y"].values == pytest.approx(0.5 * inner["y"].values ** 2, abs=1e-4)


def test_numerical_conjugate_caps_divergence():
    # the conjugate of a linear function is infinite away from the slope
    table = numerical_conjugate(Linear(0.0), -5.0, 5.0, 101, cap=1.0)
    assert table.loc[np.isclose(table["y"], 0.0), "f_star_y"].iloc[0] == 0.0
    assert table.loc[np.isclose(table["y"], 2.0), "f_star_y"].iloc[0] == INF


def test_numerical_conjugate_rejects():
    with pytest.raises(ValueError, match="1-D"):
        numerical_conjugate(Quadratic(1.0, dim=2))
    with pytest.raises(ValueError, match="dom f"):
        numerical_conjugate(IndicatorPoint(20.0), -5.0, 5.0, 11)


def test_conjugate_comparison(specs):
    table = conjugate_comparison(specs["indicator_box"], -5.0, 5.0, 1001)
    assert list(table.columns) == ["y", "phi_star_numeric", "phi_star_closed_form", "abs_diff"]
    assert table["abs_diff"].max() <= 2.0 * 0.01 * (1.0 + 5.0)
    unsupported = conjugate_comparison(Sum([Quadratic(1.0), IndicatorBox(-1.0, 1.0)]), -2.0, 2.0, 101)
    assert unsupported["phi_star_closed_form"].isna().all()


def test_n_monotone_check():
    increasing = [(x, 2.0 * x) for x in np.linspace(-1.0, 1.0, 8)]
    assert cyclically_monotone_check(increasing, max_n=3)
    decreasing = [(x, -x) for x in np.linspace(-1.0, 1.0, 8)]
    assert not n_monotone_check(decreasing, 1)
    assert n_monotone_check([], 2)
    with pytest.raises(ValueError, match="n must be"):
        n_monotone_check(increasing, 0)


def test_n_monotone_sampled_when_large(rng):
    graph = [(x, np.sign(x)) for x in rng.uniform(-1.0, 1.0, 60)]
    assert n_monotone_check(graph, 3, exhaustive_limit=1000, samples=2000)


@pytest.mark.parametrize(
    "d, expected",
    [
        ({"type": "quadratic", "a": 0.2}, Quadratic(0.2)),
        ({"type": "linear", "slope": 1.5}, Linear(1.5)),
        ({"type": "indicator_box", "lo": 0.0, "hi": ".inf"}, IndicatorBox(0.0, INF)),
        ({"type": "support_box", "radius": 2.0}, SupportBox.symmetric(2.0)),
        (
            {"type": "sum", "terms": [{"type": "indicator_box", "lo": 0, "hi": ".inf"}, {"type": "linear", "slope": 0.5}]},
            Sum([IndicatorBox(0.0, INF), Linear(0.5)]),
        ),
    ],
)
def test_convex_spec_from_dict(d, expected):
    assert convex_spec_from_dict(d) == expected


def test_convex_spec_round_trip(specs):
    for f in specs.values():
        assert convex_spec_from_dict(f.to_dict()) == f


def test_convex_spec_from_dict_errors():
    with pytest.raises(ValueError, match="type"):
        convex_spec_from_dict({"a": 1.0})
    with pytest.raises(ValueError, match="unknown"):
        convex_spec_from_dict({"type": "cubic"})
    with pytest.raises(ValueError, match="missing"):
        convex_spec_from_dict({"type": "quadratic"})
