# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

"""Closed-form extended-real convex functions.

Every function is a small immutable spec object. Values are python floats in
(-inf, +inf]; +inf encodes "outside the domain". The polar (Fenchel
conjugate) is closed form for every tag and for a short list of registered
sums; everything else raises :class:`UnsupportedSpecError` and callers fall
back to :func:`numerical_conjugate`.
"""

import itertools
import logging

import numpy as np
import pandas as pd

from gapdyn.common.constants import (
    DEFAULT_CONJUGATE_CAP,
    DEFAULT_CONJUGATE_GRID,
    DEFAULT_CONJUGATE_SAMPLES,
    DEFAULT_EXHAUSTIVE_LIMIT,
    DEFAULT_GAP_TOL,
    DEFAULT_MEMBERSHIP_TOL,
    DEFAULT_MONOTONE_SAMPLES,
    SEED,
)
from gapdyn.common.python_utils import INF, as_vector, ext_sum


logger = logging.getLogger(__name__)


class UnsupportedSpecError(ValueError):
    """Raised when a spec has no closed form for the requested operation."""


def _broadcast(values, dim, name):
    arr = as_vector(values, name)
    if dim is not None:
        if arr.size == 1:
            arr = np.full(dim, arr[0])
        elif arr.size != dim:
            raise ValueError("{} has {} entries but dim={}".format(name, arr.size, dim))
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _bound_to_list(values):
    return [float(v) if np.isfinite(v) else (".inf" if v > 0 else "-.inf") for v in values]


def _scale(vec):
    return max(1.0, float(np.max(np.abs(vec)))) if vec.size else 1.0


class ConvexFunctionSpec(object):
    """Base class of the convex function algebra."""

    tag = None

    @property
    def dim(self):
        raise NotImplementedError

    def value(self, x):
        raise NotImplementedError

    def contains_subgradient(self, x, u, tol):
        raise NotImplementedError

    def polar(self):
        raise UnsupportedSpecError("{} has no closed-form polar".format(self.tag))

    def prox(self, x0, lam):
        raise UnsupportedSpecError("{} has no closed-form prox".format(self.tag))

    def to_dict(self):
        raise NotImplementedError

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        if not isinstance(other, ConvexFunctionSpec):
            return NotImplemented
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((self.tag, self._key()))

    def __repr__(self):
        return "{}({})".format(type(self).__name__, self.to_dict())


class Quadratic(ConvexFunctionSpec):
    """(a/2)|x - center|^2."""

    tag = "quadratic"

    def __init__(self, a, center=0.0, dim=None):
        if not a > 0:
            raise ValueError("Quadratic requires a > 0, got {}".format(a))
        self.a = float(a)
        self.center = _frozen(_broadcast(center, dim, "center"))

    @property
    def dim(self):
        return self.center.size

    def value(self, x):
        d = x - self.center
        return 0.5 * self.a * float(np.dot(d, d))

    def gradient(self, x):
        return self.a * (x - self.center)

    def contains_subgradient(self, x, u, tol):
        g = self.gradient(x)
        return bool(np.max(np.abs(u - g)) <= tol * _scale(g))

    def polar(self):
        zero = np.zeros(self.dim)
        if not np.any(self.center):
            return Quadratic(1.0 / self.a, zero)
        return Sum([Quadratic(1.0 / self.a, zero), Linear(self.center)])

    def prox(self, x0, lam):
        return (x0 + lam * self.a * self.center) / (1.0 + lam * self.a)

    def to_dict(self):
        return {"type": self.tag, "a": self.a, "center": self.center.tolist()}

    def _key(self):
        return (self.a, tuple(self.center))


class Linear(ConvexFunctionSpec):
    """<slope, x>. Linear(0) is the zero function."""

    tag = "linear"

    def __init__(self, slope, dim=None):
        self.slope = _frozen(_broadcast(slope, dim, "slope"))

    @property
    def dim(self):
        return self.slope.size

    def value(self, x):
        return float(np.dot(self.slope, x))

    def contains_subgradient(self, x, u, tol):
        return bool(np.max(np.abs(u - self.slope)) <= tol * _scale(self.slope))

    def polar(self):
        return IndicatorPoint(self.slope)

    def prox(self, x0, lam):
        return x0 - lam * self.slope

    def to_dict(self):
        return {"type": self.tag, "slope": self.slope.tolist()}

    def _key(self):
        return tuple(self.slope)


class IndicatorPoint(ConvexFunctionSpec):
    """chi_{x0}: 0 at x0, +inf elsewhere.

    ``tol`` widens the point to a max-norm ball of that radius; it is 0 for
    the exact function and set by dissipation laws to absorb round-off.
    """

    tag = "indicator_point"

    def __init__(self, x0, dim=None, tol=0.0):
        self.x0 = _frozen(_broadcast(x0, dim, "x0"))
        self.tol = float(tol)

    @property
    def dim(self):
        return self.x0.size

    def _inside(self, x):
        return bool(np.max(np.abs(x - self.x0)) <= self.tol)

    def value(self, x):
        return 0.0 if self._inside(x) else INF

    def contains_subgradient(self, x, u, tol):
        # the subdifferential at x0 is the whole space
        return self._inside(x)

    def polar(self):
        return Linear(self.x0)

    def prox(self, x0, lam):
        return np.array(self.x0)

    def to_dict(self):
        d = {"type": self.tag, "x0": self.x0.tolist()}
        if self.tol:
            d["tol"] = self.tol
        return d

    def _key(self):
        return (tuple(self.x0), self.tol)


class IndicatorBox(ConvexFunctionSpec):
    """Indicator of the closed box [lo, hi]; infinite bounds give half-lines."""

    tag = "indicator_box"

    def __init__(self, lo, hi, dim=None, tol=0.0):
        lo = _broadcast(lo, dim, "lo")
        hi = _broadcast(hi, dim if dim is not None else lo.size, "hi")
        if lo.size != hi.size:
            lo = _broadcast(lo, hi.size, "lo")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds cannot be NaN")
        if np.any(lo > hi) or np.any(lo == INF) or np.any(hi == -INF):
            raise ValueError("box [{}, {}] is empty".format(lo.tolist(), hi.tolist()))
        self.lo = _frozen(lo)
        self.hi = _frozen(hi)
        self.tol = float(tol)

    @property
    def dim(self):
        return self.lo.size

    def _inside(self, x):
        return bool(np.all(x >= self.lo - self.tol) and np.all(x <= self.hi + self.tol))

    def value(self, x):
        return 0.0 if self._inside(x) else INF

    def contains_subgradient(self, x, u, tol):
        if not self._inside(x):
            return False
        reach = max(tol, self.tol)
        at_lo = x <= self.lo + reach
        at_hi = x >= self.hi - reach
        # normal cone of a box, coordinatewise
        ok = np.where(
            at_lo & at_hi,
            True,
            np.where(at_lo, u <= tol, np.where(at_hi, u >= -tol, np.abs(u) <= tol)),
        )
        return bool(np.all(ok))

    def polar(self):
        return SupportBox(self.lo, self.hi)

    def prox(self, x0, lam):
        return np.clip(x0, self.lo, self.hi)

    def to_dict(self):
        d = {"type": self.tag, "lo": _bound_to_list(self.lo), "hi": _bound_to_list(self.hi)}
        if self.tol:
            d["tol"] = self.tol
        return d

    def _key(self):
        return (tuple(self.lo), tuple(self.hi), self.tol)


class SupportBox(ConvexFunctionSpec):
    """Support function of the box [lo, hi] evaluated at y - shift.

    ``SupportBox.symmetric(r)`` is r*|y|_1, the polar of IndicatorBox[-r, r].
    A half-line box gives a cone indicator, e.g. lo=0, hi=+inf, shift=Y is
    chi_(-inf, Y], the polar of the damage potential.
    """

    tag = "support_box"

    def __init__(self, lo, hi, shift=0.0, dim=None, tol=0.0):
        box = IndicatorBox(lo, hi, dim=dim)
        self.lo = box.lo
        self.hi = box.hi
        self.shift = _frozen(_broadcast(shift, self.lo.size, "shift"))
        # |y - shift| <= tol counts as the kink, used by laws to absorb round-off
        self.tol = float(tol)

    @classmethod
    def symmetric(cls, radius, dim=1):
        if radius < 0:
            raise ValueError("radius must be nonnegative, got {}".format(radius))
        return cls(-float(radius), float(radius), dim=dim)

    @property
    def dim(self):
        return self.lo.size

    def _offset(self, y):
        w = y - self.shift
        if self.tol:
            w = np.where(np.abs(w) <= self.tol, 0.0, w)
        return w

    def _terms(self, w):
        with np.errstate(invalid="ignore"):
            return np.where(w > 0, self.hi * w, np.where(w < 0, self.lo * w, 0.0))

    def value(self, y):
        return ext_sum(*self._terms(self._offset(y)))

    def contains_subgradient(self, y, u, tol):
        w = self._offset(y)
        if self.value(y) == INF:
            return False
        ok = np.where(
            w > 0,
            np.abs(u - np.where(np.isfinite(self.hi), self.hi, 0.0)) <= tol,
            np.where(
                w < 0,
                np.abs(u - np.where(np.isfinite(self.lo), self.lo, 0.0)) <= tol,
                (u >= self.lo - tol) & (u <= self.hi + tol),
            ),
        )
        return bool(np.all(ok))

    def polar(self):
        box = IndicatorBox(self.lo, self.hi)
        if not np.any(self.shift):
            return box
        return Sum([Linear(self.shift), box])

    def prox(self, x0, lam):
        # Moreau decomposition: prox of a support function is the residual of a projection
        v = x0 - self.shift
        return self.shift + v - lam * np.clip(v / lam, self.lo, self.hi)

    def to_dict(self):
        d = {"type": self.tag, "lo": _bound_to_list(self.lo), "hi": _bound_to_list(self.hi)}
        if np.any(self.shift):
            d["shift"] = self.shift.tolist()
        if self.tol:
            d["tol"] = self.tol
        return d

    def _key(self):
        return (tuple(self.lo), tuple(self.hi), tuple(self.shift), self.tol)


class _Collapsed(object):
    """Sum terms grouped by kind: linear slope, quadratic curvature, box, rest."""

    def __init__(self, dim):
        self.slope = np.zeros(dim)
        self.curvature = 0.0
        self.weighted_center = np.zeros(dim)
        self.quadratics = []
        self.lo = np.full(dim, -INF)
        self.hi = np.full(dim, INF)
        self.boxes = 0
        self.box_tol = 0.0
        self.points = []
        self.supports = []
        self.others = []

    @property
    def center(self):
        return self.weighted_center / self.curvature

    @property
    def box_is_free(self):
        return self.boxes == 0


class Sum(ConvexFunctionSpec):
    """Pointwise sum of specs over the same space.

    Polars are only registered for:

    * Quadratic(a, 0) + Linear(s)  ->  Quadratic(1/a, s)
    * IndicatorBox + Linear(s)     ->  SupportBox(lo, hi, shift=s)
    * Linear terms only            ->  IndicatorPoint(sum of slopes)
    """

    tag = "sum"

    def __init__(self, terms):
        terms = list(terms)
        if not terms:
            raise ValueError("Sum needs at least one term")
        dims = {t.dim for t in terms}
        if len(dims) != 1:
            raise ValueError("Sum terms must share one dimension, got {}".format(sorted(dims)))
        self.terms = tuple(terms)

    @property
    def dim(self):
        return self.terms[0].dim

    def _flat_terms(self):
        for term in self.terms:
            if isinstance(term, Sum):
                for sub in term._flat_terms():
                    yield sub
            else:
                yield term

    def _collapse(self):
        c = _Collapsed(self.dim)
        for term in self._flat_terms():
            if isinstance(term, Linear):
                c.slope = c.slope + term.slope
            elif isinstance(term, Quadratic):
                c.curvature += term.a
                c.weighted_center = c.weighted_center + term.a * term.center
                c.quadratics.append(term)
            elif isinstance(term, IndicatorBox):
                c.lo = np.maximum(c.lo, term.lo)
                c.hi = np.minimum(c.hi, term.hi)
                c.boxes += 1
                c.box_tol = max(c.box_tol, term.tol)
            elif isinstance(term, IndicatorPoint):
                c.points.append(term)
            elif isinstance(term, SupportBox):
                c.supports.append(term)
            else:
                c.others.append(term)
        return c

    def value(self, x):
        return ext_sum(*(term.value(x) for term in self.terms))

    def contains_subgradient(self, x, u, tol):
        if self.value(x) == INF:
            return False
        c = self._collapse()
        if c.others:
            raise UnsupportedSpecError("no closed-form subdifferential for a Sum containing {}".format(c.others[0].tag))
        residual = u - c.slope
        if c.curvature:
            residual = residual - c.curvature * (x - c.center)
        if c.points:
            return True
        if not c.supports:
            if c.box_is_free:
                return bool(np.max(np.abs(residual)) <= tol * _scale(u))
            return IndicatorBox(c.lo, c.hi, tol=c.box_tol).contains_subgradient(x, residual, tol)
        if len(c.supports) == 1 and c.box_is_free:
            return c.supports[0].contains_subgradient(x, residual, tol)
        raise UnsupportedSpecError("no closed-form subdifferential for this Sum")

    def polar(self):
        c = self._collapse()
        if c.others or c.points or c.supports:
            raise UnsupportedSpecError("no registered polar for this Sum")
        if c.curvature:
            if len(c.quadratics) == 1 and not np.any(c.quadratics[0].center) and c.box_is_free:
                return Quadratic(1.0 / c.curvature, c.slope)
            raise UnsupportedSpecError("no registered polar for this Sum of quadratics")
        if c.box_is_free:
            return IndicatorPoint(c.slope)
        return SupportBox(c.lo, c.hi, shift=c.slope)

    def prox(self, x0, lam):
        c = self._collapse()
        if c.others:
            raise UnsupportedSpecError("no closed-form prox for this Sum")
        if c.points:
            return np.array(c.points[0].x0)
        if c.supports:
            if len(c.supports) == 1 and not c.curvature and c.box_is_free:
                return c.supports[0].prox(x0 - lam * c.slope, lam)
            raise UnsupportedSpecError("no closed-form prox for this Sum")
        x = x0 - lam * c.slope
        if c.curvature:
            x = (x + lam * c.weighted_center) / (1.0 + lam * c.curvature)
        return np.clip(x, c.lo, c.hi)

    def to_dict(self):
        return {"type": self.tag, "terms": [t.to_dict() for t in self.terms]}

    def _key(self):
        return tuple((type(t).__name__, t._key()) for t in self.terms)


class SeparableProduct(ConvexFunctionSpec):
    """f(x) = sum_k f_k(x[block_k]) for blocks partitioning the coordinates."""

    tag = "separable_product"

    def __init__(self, blocks):
        blocks = [(spec, tuple(int(i) for i in idx)) for spec, idx in blocks]
        if not blocks:
            raise ValueError("SeparableProduct needs at least one block")
        seen = []
        for spec, idx in blocks:
            if len(idx) != spec.dim:
                raise ValueError(
                    "block {} has {} coordinates but its spec has dim {}".format(idx, len(idx), spec.dim)
                )
            seen.extend(idx)
        if sorted(seen) != list(range(len(seen))):
            raise ValueError("blocks must partition the coordinates 0..n-1, got {}".format(sorted(seen)))
        self.blocks = tuple(blocks)
        self._dim = len(seen)

    @property
    def dim(self):
        return self._dim

    def value(self, x):
        return ext_sum(*(spec.value(x[list(idx)]) for spec, idx in self.blocks))

    def contains_subgradient(self, x, u, tol):
        return all(
            spec.contains_subgradient(x[list(idx)], u[list(idx)], tol) for spec, idx in self.blocks
        )

    def polar(self):
        return SeparableProduct([(spec.polar(), idx) for spec, idx in self.blocks])

    def prox(self, x0, lam):
        out = np.empty(self.dim)
        for spec, idx in self.blocks:
            out[list(idx)] = spec.prox(x0[list(idx)], lam)
        return out

    def to_dict(self):
        return {
            "type": self.tag,
            "blocks": [{"spec": spec.to_dict(), "indices": list(idx)} for spec, idx in self.blocks],
        }

    def _key(self):
        return tuple((type(s).__name__, s._key(), idx) for s, idx in self.blocks)


class SubdifferentialQuery(object):
    """Question "is candidate in the subdifferential of f at point?"."""

    def __init__(self, point, candidate):
        self.point = as_vector(point, "point")
        self.candidate = as_vector(candidate, "candidate")
        if self.point.size != self.candidate.size:
            raise ValueError("point and candidate dimensions differ")

    def holds_for(self, f, tol=DEFAULT_MEMBERSHIP_TOL):
        return subgradient_contains(f, self.point, self.candidate, tol)


def _checked(f, x, name="x"):
    x = as_vector(x, name)
    if x.size != f.dim:
        raise ValueError("{} has dimension {} but {} acts on R^{}".format(name, x.size, f.tag, f.dim))
    return x


def evaluate(f, x):
    """Evaluate a spec.

    Args:
        f (ConvexFunctionSpec): Function.
        x (array_like): Point of R^dim.

    Returns:
        float: Extended real value, +inf outside the domain.
    """
    return f.value(_checked(f, x))


def subgradient_contains(f, x, u, tol=DEFAULT_MEMBERSHIP_TOL):
    """Decide u in df(x) up to tol with the closed-form subdifferential.

    Returns False when x is outside dom f, since df(x) is then empty.
    """
    x = _checked(f, x)
    u = _checked(f, u, "u")
    if f.value(x) == INF:
        return False
    return f.contains_subgradient(x, u, tol)


def polar(f):
    """Closed-form Fenchel conjugate f*(y) = sup_x <x, y> - f(x).

    Raises:
        UnsupportedSpecError: If no closed form is registered.
    """
    return f.polar()


def prox(f, x0, lam):
    """Proximal map argmin_x f(x) + |x - x0|^2 / (2 lam)."""
    if not lam > 0:
        raise ValueError("prox needs lambda > 0, got {}".format(lam))
    return np.asarray(f.prox(_checked(f, x0, "x0"), float(lam)), dtype=float)


def fenchel_gap(f, x, y, f_star=None):
    """Fenchel gap c(x, y) = f(x) + f*(y) - <x, y>.

    Nonnegative, and zero exactly when y is in df(x).

    Args:
        f (ConvexFunctionSpec): Function.
        x (array_like): Primal point.
        y (array_like): Dual point.
        f_star (ConvexFunctionSpec): Precomputed polar, to avoid rebuilding it in loops.

    Returns:
        float: The gap as an extended real.
    """
    x = _checked(f, x)
    y = _checked(f, y, "y")
    f_star = f.polar() if f_star is None else f_star
    fx = f.value(x)
    fy = f_star.value(y)
    if fx == INF or fy == INF:
        return INF
    return fx + fy - float(np.dot(x, y))


def uniform_grid(lo, hi, samples):
    if samples < 2:
        raise ValueError("need at least 2 samples, got {}".format(samples))
    if not lo < hi:
        raise ValueError("grid needs lo < hi, got [{}, {}]".format(lo, hi))
    xs = np.linspace(lo, hi, int(samples))
    spacing = (hi - lo) / (samples - 1)
    xs[np.abs(xs) < 1e-9 * spacing] = 0.0
    return xs


def numerical_conjugate(
    f,
    grid_lo=DEFAULT_CONJUGATE_GRID[0],
    grid_hi=DEFAULT_CONJUGATE_GRID[1],
    samples=DEFAULT_CONJUGATE_SAMPLES,
    cap=DEFAULT_CONJUGATE_CAP,
    chunk=256,
):
    """Brute force conjugate of a 1-D spec on a uniform grid.

    f*(y) is approximated by max over grid x of x*y - f(x), with y on the same
    grid. Values above ``cap`` are reported as +inf.

    Args:
        f (ConvexFunctionSpec): 1-D function.
        grid_lo (float): Grid start.
        grid_hi (float): Grid end.
        samples (int): Number of grid points.
        cap (float): Divergence cap.
        chunk (int): Rows of the y-by-x table evaluated at once.

    Returns:
        pd.DataFrame: Columns ``y`` and ``f_star_y``.
    """
    if f.dim != 1:
        raise ValueError("numerical_conjugate needs a 1-D function, got dim {}".format(f.dim))
    xs = uniform_grid(grid_lo, grid_hi, samples)
    fx = np.array([f.value(np.array([x])) for x in xs])
    finite = np.isfinite(fx)
    if not finite.any():
        raise ValueError("dom f does not meet the grid [{}, {}]".format(grid_lo, grid_hi))
    xs_dom = xs[finite]
    fx_dom = fx[finite]
    values = np.empty(xs.size)
    for start in range(0, xs.size, chunk):
        ys = xs[start : start + chunk]
        values[start : start + chunk] = np.max(np.outer(ys, xs_dom) - fx_dom, axis=1)
    values[values > cap] = INF
    return pd.DataFrame({"y": xs, "f_star_y": values})


def conjugate_comparison(
    f,
    grid_lo=DEFAULT_CONJUGATE_GRID[0],
    grid_hi=DEFAULT_CONJUGATE_GRID[1],
    samples=DEFAULT_CONJUGATE_SAMPLES,
    cap=DEFAULT_CONJUGATE_CAP,
):
    """Numerical conjugate side by side with the closed-form polar.

    Returns:
        pd.DataFrame: Columns ``y``, ``phi_star_numeric``, ``phi_star_closed_form``
        (NaN without a closed form) and ``abs_diff``.
    """
    table = numerical_conjugate(f, grid_lo, grid_hi, samples, cap)
    numeric = table["f_star_y"].values
    try:
        f_star = f.polar()
        closed = np.array([f_star.value(np.array([y])) for y in table["y"].values])
    except UnsupportedSpecError:
        logger.info("no closed-form polar for %s, reporting the numeric table only", f.tag)
        closed = np.full(numeric.size, np.nan)
    both_inf = np.isinf(numeric) & np.isinf(closed)
    with np.errstate(invalid="ignore"):
        diff = np.where(both_inf, 0.0, np.abs(numeric - closed))
    return pd.DataFrame(
        {
            "y": table["y"].values,
            "phi_star_numeric": numeric,
            "phi_star_closed_form": closed,
            "abs_diff": diff,
        }
    )


def n_monotone_check(
    graph,
    n,
    exhaustive_limit=DEFAULT_EXHAUSTIVE_LIMIT,
    samples=DEFAULT_MONOTONE_SAMPLES,
    seed=SEED,
    tol=DEFAULT_GAP_TOL,
):
    """Check the n-monotonicity chain inequality on a finite graph.

    For every ordered (n+1)-tuple (x_0, y_0), ..., (x_n, y_n) of graph points,
    repetitions allowed, checks
    <x_n - x_0, y_n> + sum_{k=1..n} <x_{k-1} - x_k, y_{k-1}> >= -tol.
    All tuples are enumerated when there are at most ``exhaustive_limit`` of
    them, otherwise ``samples`` tuples are drawn with a seeded generator.

    Args:
        graph (list): Pairs (x, y) of scalars or equal-length vectors.
        n (int): Chain length, n >= 1.
        exhaustive_limit (int): Largest tuple count enumerated exhaustively.
        samples (int): Sampled tuples above the limit.
        seed (int): Seed of the tuple sampler.
        tol (float): Allowed negative slack.

    Returns:
        bool: True if no tuple violates the inequality.
    """
    if n < 1:
        raise ValueError("n must be >= 1, got {}".format(n))
    if len(graph) == 0:
        return True
    xs = np.array([as_vector(x, "x") for x, _ in graph])
    ys = np.array([as_vector(y, "y") for _, y in graph])
    if xs.shape != ys.shape:
        raise ValueError("graph x and y entries must share one dimension")
    m = xs.shape[0]
    if m ** (n + 1) <= exhaustive_limit:
        tuples = np.array(list(itertools.product(range(m), repeat=n + 1)), dtype=int)
    else:
        rng = np.random.default_rng(seed)
        tuples = rng.integers(0, m, size=(samples, n + 1))
    X = xs[tuples]
    Y = ys[tuples]
    closing = np.sum((X[:, -1] - X[:, 0]) * Y[:, -1], axis=-1)
    chain = np.sum((X[:, :-1] - X[:, 1:]) * Y[:, :-1], axis=(1, 2))
    totals = closing + chain
    violations = int(np.sum(totals < -tol))
    if violations:
        logger.debug("%d of %d tuples violate %d-monotonicity", violations, totals.size, n)
    return violations == 0


def cyclically_monotone_check(graph, max_n=3, **kwargs):
    """n_monotone_check for every n in 1..max_n."""
    return all(n_monotone_check(graph, n, **kwargs) for n in range(1, max_n + 1))


def _bound(value):
    if value is None:
        return np.nan
    if isinstance(value, str):
        return float(value.replace(".inf", "inf"))
    return float(value)


def _bounds(values, default):
    if values is None:
        return default
    return [(_bound(v) if v is not None else default) for v in np.atleast_1d(values).tolist()]


def convex_spec_from_dict(d):
    """Build a spec from its mapping form, e.g. ``{"type": "quadratic", "a": 0.2}``.

    Args:
        d (dict): Mapping with a ``type`` key and the tag parameters.

    Returns:
        ConvexFunctionSpec: The spec.

    Raises:
        ValueError: On an unknown type or missing parameter.
    """
    if not isinstance(d, dict) or "type" not in d:
        raise ValueError("convex function spec must be a mapping with a 'type' key, got {!r}".format(d))
    kind = d["type"]
    dim = d.get("dim")
    try:
        if kind == Quadratic.tag:
            return Quadratic(d["a"], d.get("center", 0.0), dim=dim)
        if kind == Linear.tag:
            return Linear(d["slope"], dim=dim)
        if kind == IndicatorPoint.tag:
            return IndicatorPoint(d.get("x0", 0.0), dim=dim, tol=d.get("tol", 0.0))
        if kind == IndicatorBox.tag:
            return IndicatorBox(
                _bounds(d.get("lo"), -INF), _bounds(d.get("hi"), INF), dim=dim, tol=d.get("tol", 0.0)
            )
        if kind == SupportBox.tag:
            if "radius" in d:
                return SupportBox.symmetric(float(d["radius"]), dim=dim or 1)
            return SupportBox(
                _bounds(d.get("lo"), -INF), _bounds(d.get("hi"), INF), d.get("shift", 0.0),
                dim=dim,
                tol=d.get("tol", 0.0),
            )
        if kind == Sum.tag:
            return Sum([convex_spec_from_dict(t) for t in d["terms"]])
        if kind == SeparableProduct.tag:
            return SeparableProduct(
                [(convex_spec_from_dict(b["spec"]), b["indices"]) for b in d["blocks"]]
            )
    except KeyError as e:
        raise ValueError("convex function spec {!r} is missing parameter {}".format(kind, e))
    raise ValueError("unknown convex function type {!r}".format(kind))


def with_tolerance(f, tol):
    """Copy of f whose indicator and kink terms accept round-off up to tol.

    Used by dissipation laws, where rates are difference quotients and exact
    indicators would turn 1e-13 errors into +inf.
    """
    if isinstance(f, IndicatorPoint):
        return IndicatorPoint(f.x0, tol=tol)
    if isinstance(f, IndicatorBox):
        return IndicatorBox(f.lo, f.hi, tol=tol)
    if isinstance(f, SupportBox):
        return SupportBox(f.lo, f.hi, f.shift, tol=tol)
    if isinstance(f, Sum):
        return Sum([with_tolerance(t, tol) for t in f.terms])
    if isinstance(f, SeparableProduct):
        return SeparableProduct([(with_tolerance(spec, tol), idx) for spec, idx in f.blocks])
    return f
