# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

"""Builtin hamiltonian systems with analytic derivatives.

Partial derivatives take and return raw numpy arrays laid out like the
PhaseVector slots, so steppers can call them without allocating phase
vectors. Layouts:

* plain: q = (q,), p = (p,)
* internal: q = (q, q_I), p = (p, p_I)
* damage: q = (q, d), p = (p, r)
"""

import logging

import numpy as np

from gapdyn.common.constants import LAYOUT_COORDINATES
from gapdyn.dynamics.forcing import Zero, forcing_from_dict
from gapdyn.geometry.cones import ConstraintSet, HalfSpace
from gapdyn.geometry.phase_space import PhaseVector, symplectic_gradient


logger = logging.getLogger(__name__)


def _positive(name, value):
    value = float(value)
    if not value > 0:
        raise ValueError("{} must be > 0, got {}".format(name, value))
    return value


class HamiltonianModel(object):
    """Base class. Subclasses implement H and its partial derivatives."""

    tag = None
    layout = "plain"
    is_separable = True

    @property
    def dim(self):
        return len(LAYOUT_COORDINATES[self.layout][0])

    @property
    def inverse_mass(self):
        """Diagonal of d2H/dp2."""
        raise NotImplementedError

    def hamiltonian(self, q, p, t=0.0):
        raise NotImplementedError

    def partial_q(self, q, p, t=0.0):
        raise NotImplementedError

    def partial_p(self, q, p, t=0.0):
        raise NotImplementedError

    def partial_t(self, q, p, t=0.0):
        return 0.0

    def energy(self, z, t=0.0):
        """H(z, t) for a phase vector z."""
        if z.dim != self.dim:
            raise ValueError(
                "state has dimension {} but {} uses the {} layout of dimension {}".format(
                    z.dim, type(self).__name__, self.layout, self.dim
                )
            )
        return float(self.hamiltonian(z.q, z.p, t))

    def to_dict(self):
        raise NotImplementedError

    def __eq__(self, other):
        if not isinstance(other, HamiltonianModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self))

    def __repr__(self):
        return "{}({})".format(type(self).__name__, self.to_dict())


class HarmonicOscillator(HamiltonianModel):
    """H = p^2/(2m) + k q^2/2."""

    tag = "harmonic_oscillator"

    def __init__(self, m=1.0, k=1.0):
        self.m = _positive("m", m)
        self.k = _positive("k", k)

    @property
    def inverse_mass(self):
        return np.array([1.0 / self.m])

    def hamiltonian(self, q, p, t=0.0):
        return p[0] ** 2 / (2.0 * self.m) + 0.5 * self.k * q[0] ** 2

    def partial_q(self, q, p, t=0.0):
        return np.array([self.k * q[0]])

    def partial_p(self, q, p, t=0.0):
        return np.array([p[0] / self.m])

    def to_dict(self):
        return {"type": self.tag, "m": self.m, "k": self.k}


class Pendulum(HamiltonianModel):
    """H = p^2/(2 m l^2) + m g l (1 - cos q)."""

    tag = "pendulum"

    def __init__(self, m=1.0, g=9.81, l=1.0):
        self.m = _positive("m", m)
        self.g = _positive("g", g)
        self.l = _positive("l", l)

    @property
    def inverse_mass(self):
        return np.array([1.0 / (self.m * self.l ** 2)])

    def hamiltonian(self, q, p, t=0.0):
        return p[0] ** 2 / (2.0 * self.m * self.l ** 2) + self.m * self.g * self.l * (1.0 - np.cos(q[0]))

    def partial_q(self, q, p, t=0.0):
        return np.array([self.m * self.g * self.l * np.sin(q[0])])

    def partial_p(self, q, p, t=0.0):
        return np.array([p[0] / (self.m * self.l ** 2)])

    def to_dict(self):
        return {"type": self.tag, "m": self.m, "g": self.g, "l": self.l}


class ElastoPlastic1D(HamiltonianModel):
    """H(q, q_I, p, p_I, t) = p^2/(2m) + k (q - q_I)^2 / 2 - q f(t).

    p_I does not enter H, so its rate is -dH/dq_I = k (q - q_I), the elastic
    force sigma.
    """

    tag = "elasto_plastic_1d"
    layout = "internal"

    def __init__(self, m=1.0, k=1.0, f=None):
        self.m = _positive("m", m)
        self.k = _positive("k", k)
        self.f = f if f is not None else Zero()

    @property
    def inverse_mass(self):
        return np.array([1.0 / self.m, 0.0])

    def stress(self, q, q_internal):
        return self.k * (q - q_internal)

    def hamiltonian(self, q, p, t=0.0):
        strain = q[0] - q[1]
        return p[0] ** 2 / (2.0 * self.m) + 0.5 * self.k * strain ** 2 - q[0] * self.f(t)

    def partial_q(self, q, p, t=0.0):
        sigma = self.stress(q[0], q[1])
        return np.array([sigma - self.f(t), -sigma])

    def partial_p(self, q, p, t=0.0):
        return np.array([p[0] / self.m, 0.0])

    def partial_t(self, q, p, t=0.0):
        return -q[0] * self.f.derivative(t)

    def to_dict(self):
        return {"type": self.tag, "m": self.m, "k": self.k, "f": self.f.to_dict()}


class DamageModel(HamiltonianModel):
    """H(q, d, p, r, t) = p^2/(2m) + r^2/(2 m_d) + (1 - d) E0 q^2 / 2 - q f(t).

    r is the momentum conjugate to the damage variable d, with inertia m_d.
    """

    tag = "damage_model"
    layout = "damage"

    def __init__(self, m=1.0, m_d=1.0, E0=1.0, f=None):
        self.m = _positive("m", m)
        self.m_d = _positive("m_d", m_d)
        self.E0 = _positive("E0", E0)
        self.f = f if f is not None else Zero()

    @property
    def inverse_mass(self):
        return np.array([1.0 / self.m, 1.0 / self.m_d])

    def elastic_energy(self, q):
        """Undamaged energy E(q) = E0 q^2 / 2, the force driving damage."""
        return 0.5 * self.E0 * q ** 2

    def hamiltonian(self, q, p, t=0.0):
        return (
            p[0] ** 2 / (2.0 * self.m)
            + p[1] ** 2 / (2.0 * self.m_d)
            + (1.0 - q[1]) * self.elastic_energy(q[0])
            - q[0] * self.f(t)
        )

    def partial_q(self, q, p, t=0.0):
        return np.array([(1.0 - q[1]) * self.E0 * q[0] - self.f(t), -self.elastic_energy(q[0])])

    def partial_p(self, q, p, t=0.0):
        return np.array([p[0] / self.m, p[1] / self.m_d])

    def partial_t(self, q, p, t=0.0):
        return -q[0] * self.f.derivative(t)

    def to_dict(self):
        return {"type": self.tag, "m": self.m, "m_d": self.m_d, "E0": self.E0, "f": self.f.to_dict()}


class ContactBall(HamiltonianModel):
    """Ball above a floor: H = p^2/(2m) + m g_grav q with M = {q >= 0}."""

    tag = "contact_ball"

    def __init__(self, m=1.0, g_grav=9.81):
        self.m = _positive("m", m)
        self.g_grav = _positive("g_grav", g_grav)

    @property
    def inverse_mass(self):
        return np.array([1.0 / self.m])

    @property
    def constraint(self):
        return ConstraintSet([HalfSpace([1.0], 0.0)])

    def hamiltonian(self, q, p, t=0.0):
        return p[0] ** 2 / (2.0 * self.m) + self.m * self.g_grav * q[0]

    def partial_q(self, q, p, t=0.0):
        return np.array([self.m * self.g_grav])

    def partial_p(self, q, p, t=0.0):
        return np.array([p[0] / self.m])

    def to_dict(self):
        return {"type": self.tag, "m": self.m, "g_grav": self.g_grav}


MODELS = {
    cls.tag: cls for cls in (HarmonicOscillator, Pendulum, ElastoPlastic1D, DamageModel, ContactBall)
}

REQUIRED_PARAMETERS = {
    HarmonicOscillator.tag: ("m", "k"),
    Pendulum.tag: ("m", "g", "l"),
    ElastoPlastic1D.tag: ("m", "k"),
    DamageModel.tag: ("m", "m_d", "E0"),
    ContactBall.tag: ("m", "g_grav"),
}


def model_from_dict(d):
    """Build a model from ``{"type": ..., **parameters}``; ``f`` is a forcing mapping."""
    if not isinstance(d, dict) or d.get("type") not in MODELS:
        raise ValueError("unknown model {!r}, expected one of {}".format(d, sorted(MODELS)))
    params = {k: v for k, v in d.items() if k != "type"}
    if "f" in params:
        params["f"] = forcing_from_dict(params["f"])
    try:
        return MODELS[d["type"]](**params)
    except TypeError as e:
        raise ValueError("bad parameters for model {!r}: {}".format(d["type"], e))


def flow_field(model, z, t=0.0):
    """Right-hand side (dH/dp, -dH/dq) of Hamilton's equations over all blocks."""
    return symplectic_gradient(model, z, t)


def elastic_force(model, q, q_internal):
    """Elastic force sigma = k (q - q_I) of an elasto-plastic model.

    Raises:
        TypeError: If the model is not ElastoPlastic1D.
    """
    if not isinstance(model, ElastoPlastic1D):
        raise TypeError("elastic_force needs an ElastoPlastic1D model, got {}".format(type(model).__name__))
    return float(model.stress(q, q_internal))


def energy(model, z, t=0.0):
    return model.energy(z, t)


def random_state(model, rng, scale=1.0):
    """Random admissible state of a builtin model, used by sampled checks."""
    q = rng.uniform(-scale, scale, model.dim)
    p = rng.uniform(-scale, scale, model.dim)
    if model.layout == "damage":
        q[1] = rng.uniform(0.0, 0.9)
        p[1] = abs(p[1])
    if isinstance(model, ContactBall):
        q[0] = abs(q[0])
    return PhaseVector(q, p)
