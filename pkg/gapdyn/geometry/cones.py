# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

"""Polyhedral constraint sets M = {q : <a_i, q> + b_i >= 0} and their cones."""

import itertools
import logging

import numpy as np
from scipy.optimize import linprog, nnls

from gapdyn.common.python_utils import as_vector
from gapdyn.config.errors import ConfigError


logger = logging.getLogger(__name__)

# active-set enumeration is exponential in the number of constraints
MAX_LCP_CONSTRAINTS = 12


class HalfSpace(object):
    """Half-space {q : <normal, q> + offset >= 0}."""

    def __init__(self, normal, offset=0.0):
        self.normal = as_vector(normal, "normal")
        if not np.any(self.normal):
            raise ValueError("half-space normal must be nonzero")
        self.normal.setflags(write=False)
        self.offset = float(offset)

    @property
    def dim(self):
        return self.normal.size

    def to_dict(self):
        return {"normal": self.normal.tolist(), "offset": self.offset}

    def __eq__(self, other):
        if not isinstance(other, HalfSpace):
            return NotImplemented
        return np.array_equal(self.normal, other.normal) and self.offset == other.offset

    def __hash__(self):
        return hash((self.normal.tobytes(), self.offset))

    def __repr__(self):
        return "HalfSpace(normal={}, offset={})".format(self.normal.tolist(), self.offset)


def _solve_lcp_projection(A, c, x0, inv_w, eps=1e-12):
    """Weighted projection argmin 1/2 (x-x0)^T W (x-x0) s.t. A x + c >= 0.

    The KKT system is the linear complementarity problem
    w = g0 + G lam >= 0, lam >= 0, w.lam = 0 with G = A W^-1 A^T, solved
    exactly by enumerating active sets by increasing size.

    Returns:
        (np.array, np.array): Projected point and multipliers.
    """
    g0 = A.dot(x0) + c
    m = g0.size
    lam = np.zeros(m)
    if np.all(g0 >= 0):
        return np.array(x0, dtype=float), lam
    if m > MAX_LCP_CONSTRAINTS:
        raise ValueError("at most {} constraints are supported, got {}".format(MAX_LCP_CONSTRAINTS, m))
    G = (A * inv_w).dot(A.T)
    slack = eps * max(1.0, float(np.max(np.abs(g0))))
    for size in range(1, m + 1):
        for active in itertools.combinations(range(m), size):
            active = list(active)
            sub = G[np.ix_(active, active)]
            try:
                lam_s = np.linalg.solve(sub, -g0[active])
            except np.linalg.LinAlgError:
                lam_s = np.linalg.lstsq(sub, -g0[active], rcond=None)[0]
            if np.any(lam_s < -slack):
                continue
            lam = np.zeros(m)
            lam[active] = np.maximum(lam_s, 0.0)
            x = x0 + inv_w * A.T.dot(lam)
            if np.all(A.dot(x) + c >= -slack):
                return x, lam
    raise ConfigError("constraint set is empty, no feasible projection exists", field="contact.constraints")


class ConstraintSet(object):
    """Finite intersection of half-spaces.

    Raises:
        ConfigError: If the intersection is empty.
    """

    def __init__(self, half_spaces):
        if isinstance(half_spaces, HalfSpace):
            half_spaces = [half_spaces]
        half_spaces = tuple(half_spaces)
        if not half_spaces:
            raise ValueError("a constraint set needs at least one half-space")
        dims = {h.dim for h in half_spaces}
        if len(dims) != 1:
            raise ValueError("half-spaces must share one dimension, got {}".format(sorted(dims)))
        self.half_spaces = half_spaces
        self.A = np.array([h.normal for h in half_spaces])
        self.b = np.array([h.offset for h in half_spaces])
        self._check_nonempty()

    def _check_nonempty(self):
        if len(self.half_spaces) == 1:
            return
        res = linprog(
            np.zeros(self.dim),
            A_ub=-self.A,
            b_ub=self.b,
            bounds=[(None, None)] * self.dim,
            method="highs",
        )
        if res.status == 2:
            raise ConfigError("constraint set is empty", field="contact.constraints")

    @property
    def dim(self):
        return self.A.shape[1]

    def gaps(self, q):
        """Constraint values g_i(q) = <a_i, q> + b_i."""
        return self.A.dot(q) + self.b

    def contains(self, q, tol=0.0):
        return bool(np.all(self.gaps(as_vector(q, "q")) >= -tol))

    def active(self, q, tol):
        """Indices of constraints with |g_i(q)| <= tol."""
        return np.flatnonzero(np.abs(self.gaps(q)) <= tol)

    def project(self, q):
        """Euclidean projection onto M."""
        q = as_vector(q, "q")
        x, _ = _solve_lcp_projection(self.A, self.b, q, np.ones(self.dim))
        return x

    def project_velocity(self, q, v, inverse_mass, restitution=0.0, tol=1e-12):
        """Post-impact velocity at a contact point q.

        Kinetic-metric projection of v onto {u : <a_i, u> >= -e <a_i, v>} over the
        active constraints, i.e. Newton's impact law. For e = 0 this is the
        projection onto the tangent cone T(q|M).

        Returns:
            (np.array, np.array): Velocity and the multipliers of the active constraints.
        """
        v = as_vector(v, "v")
        idx = self.active(q, tol)
        if idx.size == 0:
            return np.array(v), np.zeros(0)
        A = self.A[idx]
        inv_w = np.broadcast_to(np.asarray(inverse_mass, dtype=float), v.shape)
        return _solve_lcp_projection(A, restitution * A.dot(v), v, inv_w)

    def to_list(self):
        return [h.to_dict() for h in self.half_spaces]

    def __eq__(self, other):
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return self.half_spaces == other.half_spaces

    def __hash__(self):
        return hash(self.half_spaces)

    def __repr__(self):
        return "ConstraintSet({})".format(self.to_list())


def as_constraint_set(M):
    if isinstance(M, ConstraintSet):
        return M
    if isinstance(M, HalfSpace):
        return ConstraintSet([M])
    return ConstraintSet(list(M))


def constraint_set_from_list(items):
    """Build a ConstraintSet from ``[{"normal": [...], "offset": b}, ...]``."""
    try:
        return ConstraintSet([HalfSpace(item["normal"], item.get("offset", 0.0)) for item in items])
    except (KeyError, TypeError) as e:
        raise ConfigError("half-spaces need a 'normal' list and an optional 'offset' ({})".format(e), field="law.constraints")


def _checked_point(M, q, tol):
    M = as_constraint_set(M)
    q = as_vector(q, "q")
    if q.size != M.dim:
        raise ValueError("q has dimension {} but M lives in R^{}".format(q.size, M.dim))
    if not M.contains(q, tol):
        raise ValueError("q = {} is not in M (tolerance {})".format(q.tolist(), tol))
    return M, q


def normal_cone_contains(M, q, u, tol=1e-9):
    """Decide u in N(q|M) = {-sum lam_i a_i : lam_i >= 0 over active i}.

    Raises:
        ValueError: If q lies outside M by more than tol.
    """
    M, q = _checked_point(M, q, tol)
    u = as_vector(u, "u")
    idx = M.active(q, tol)
    scale = max(1.0, float(np.max(np.abs(u))))
    if idx.size == 0:
        return bool(np.max(np.abs(u)) <= tol * scale)
    _, residual = nnls(M.A[idx].T, -u)
    return bool(residual <= tol * scale)


def tangent_cone_contains(M, q, v, tol=1e-9):
    """Decide v in T(q|M) = {v : <a_i, v> >= 0 over active i}."""
    M, q = _checked_point(M, q, tol)
    v = as_vector(v, "v")
    idx = M.active(q, tol)
    if idx.size == 0:
        return True
    return bool(np.all(M.A[idx].dot(v) >= -tol * max(1.0, float(np.max(np.abs(v))))))


def normal_cone_support(M, q, v, tol=1e-9):
    """Support function of N(q|M) at v: 0 if v is in the polar cone, else +inf."""
    M, q = _checked_point(M, q, tol)
    v = as_vector(v, "v")
    idx = M.active(q, tol)
    if idx.size == 0:
        return 0.0
    worst = float(np.max(-M.A[idx].dot(v)))
    return 0.0 if worst <= tol * max(1.0, float(np.max(np.abs(v)))) else np.inf
