# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

import logging

import numpy as np

from gapdyn.common.constants import DEFAULT_FD_STEP
from gapdyn.common.python_utils import as_vector, central_difference


logger = logging.getLogger(__name__)


class ModelError(ValueError):
    """Raised when a model cannot provide a derivative at the requested point."""


class PhaseVector(object):
    """Point z = (q, p) of the phase space R^n x R^n.

    The same type holds states, rates z_dot and gap vectors eta. Models with
    internal variables concatenate the blocks inside each slot, e.g. the
    elasto-plastic layout stores q = (q, q_I) and p = (p, p_I), so the duality
    pairing below is the pairing of the extended space without any extra code.

    Instances are immutable: both arrays are copied and marked read-only.
    """

    __slots__ = ("q", "p")

    def __init__(self, q, p):
        """Initialize the phase vector.

        Args:
            q (float or array_like): State slot.
            p (float or array_like): Momentum slot.
        """
        q = np.array(as_vector(q, "q"))
        p = np.array(as_vector(p, "p"))
        if q.shape != p.shape:
            raise ValueError(
                "q and p must have the same dimension, got {} and {}".format(q.size, p.size)
            )
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("phase vector entries must be finite")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("PhaseVector is immutable")

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros(dim), np.zeros(dim))

    @classmethod
    def from_flat(cls, v):
        """Build a phase vector from the concatenation [q; p]."""
        v = as_vector(v, "v")
        if v.size % 2:
            raise ValueError("flat phase vector must have even length, got {}".format(v.size))
        n = v.size // 2
        return cls(v[:n], v[n:])

    @property
    def dim(self):
        return self.q.size

    def flat(self):
        """Concatenation [q; p]."""
        return np.concatenate([self.q, self.p])

    def flat_dual(self):
        """Concatenation [p; q].

        This is the Euclidean representative of z as a linear functional under
        the duality pairing: dual_pairing(w, z) == w.flat() @ z.flat_dual().
        """
        return np.concatenate([self.p, self.q])

    def allclose(self, other, atol=1e-12):
        _check_dims(self, other)
        return bool(
            np.allclose(self.q, other.q, rtol=0.0, atol=atol)
            and np.allclose(self.p, other.p, rtol=0.0, atol=atol)
        )

    def __add__(self, other):
        _check_dims(self, other)
        return PhaseVector(self.q + other.q, self.p + other.p)

    def __sub__(self, other):
        _check_dims(self, other)
        return PhaseVector(self.q - other.q, self.p - other.p)

    def __mul__(self, scalar):
        return PhaseVector(scalar * self.q, scalar * self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return PhaseVector(-self.q, -self.p)

    def __eq__(self, other):
        if not isinstance(other, PhaseVector):
            return NotImplemented
        return bool(np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p))

    def __hash__(self):
        return hash((self.q.tobytes(), self.p.tobytes()))

    def __repr__(self):
        return "PhaseVector(q={}, p={})".format(self.q.tolist(), self.p.tolist())


def _check_dims(z1, z2):
    if z1.dim != z2.dim:
        raise ValueError("dimension mismatch: {} vs {}".format(z1.dim, z2.dim))


def dual_pairing(z1, z2):
    """Duality pairing <<z1, z2>> = <q1, p2> + <q2, p1>.

    Args:
        z1 (PhaseVector): First argument.
        z2 (PhaseVector): Second argument.

    Returns:
        float: The pairing.
    """
    _check_dims(z1, z2)
    return float(np.dot(z1.q, z2.p) + np.dot(z2.q, z1.p))


def symplectic_form(z1, z2):
    """Symplectic form omega(z1, z2) = <q1, p2> - <q2, p1>.

    Equal to dual_pairing(conjugate(z1), z2).
    """
    _check_dims(z1, z2)
    return float(np.dot(z1.q, z2.p) - np.dot(z2.q, z1.p))


def conjugate(z):
    """Linear conjugation (q, p) -> (q, -p). It is an involution."""
    return PhaseVector(z.q, -z.p)


def _check_model_dims(model, z):
    if z.dim != model.dim:
        raise ValueError(
            "state has dimension {} but model {} expects {}".format(
                z.dim, type(model).__name__, model.dim
            )
        )


def gradient(model, z, t=0.0):
    """Gradient DH(z) in the slot convention DH = (dH/dp, dH/dq).

    .. note::

        The q-slot holds dH/dp and the p-slot holds dH/dq, which differs from
        the usual (dH/dq, dH/dp). With this convention dual_pairing(DH(z), z')
        is the directional derivative of H along z'.

    Args:
        model (HamiltonianModel): Model providing partial derivatives.
        z (PhaseVector): Evaluation point.
        t (float): Time.

    Returns:
        PhaseVector: DH(z).

    Raises:
        ModelError: If the model cannot evaluate its derivatives.
    """
    _check_model_dims(model, z)
    try:
        dh_dp = model.partial_p(z.q, z.p, t)
        dh_dq = model.partial_q(z.q, z.p, t)
    except (AttributeError, NotImplementedError) as e:
        raise ModelError(
            "model {} does not provide partial derivatives: {}".format(type(model).__name__, e)
        )
    return PhaseVector(dh_dp, dh_dq)


def symplectic_gradient(model, z, t=0.0):
    """Symplectic gradient XH(z) = (dH/dp, -dH/dq), the right-hand side of Hamilton's equations.

    Computed as conjugate(gradient(...)) so both share one arithmetic path.
    """
    return conjugate(gradient(model, z, t))


def directional_derivative(model, z, z_dir, t=0.0, h=DEFAULT_FD_STEP):
    """Central difference (H(z + h z') - H(z - h z')) / 2h."""
    _check_dims(z, z_dir)
    forward = model.energy(z + h * z_dir, t)
    backward = model.energy(z - h * z_dir, t)
    return (forward - backward) / (2.0 * h)


def finite_difference_gradient(model, z, t=0.0, h=DEFAULT_FD_STEP):
    """Finite difference oracle for :func:`gradient`, same slot convention.

    Args:
        model (HamiltonianModel): Model providing the energy.
        z (PhaseVector): Evaluation point.
        t (float): Time.
        h (float): Central difference step.

    Returns:
        PhaseVector: (dH/dp, dH/dq) estimated by central differences.
    """
    _check_model_dims(model, z)

    def energy_flat(v):
        return model.energy(PhaseVector.from_flat(v), t)

    grad = central_difference(energy_flat, z.flat(), h)
    n = z.dim
    return PhaseVector(grad[n:], grad[:n])
