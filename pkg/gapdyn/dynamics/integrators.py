# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

"""First-order steppers whose gap vectors have zero information content.

Every stepper is built on the symplectic Euler base point z* = (q_n, p_{n+1})
at t_n. The discrete rate is z_dot = (z_{n+1} - z_n)/dt and the gap is

    eta_q = q_dot - dH/dp(z*),   eta_p = -p_dot - dH/dq(z*)

with these overrides, shared by :func:`discrete_gap_sample`:

* plastic: the internal row of dH/dq is taken at the updated state, since the
  return mapping is backward Euler on q_I;
* damage: the d_dot slot is the post-step rate dH/dr(r_{n+1});
* contact: the q_dot slot is dH/dp(q_n, p_w) with the Newton-weighted momentum
  p_w = (p_{n+1} + e p_free)/(1 + e).

Constraint terms are evaluated at the end state z_{n+1} (catching-up).
"""

import logging

import numpy as np
import pandas as pd
from scipy.stats import linregress
from tqdm import tqdm

from gapdyn.common.constants import (
    DEFAULT_ENERGY_COL,
    DEFAULT_FP_TOL,
    DEFAULT_MAX_ITER,
    DEFAULT_RESIDUAL_COL,
    DEFAULT_STEP_TOL,
    DEFAULT_TIME_COL,
    LAYOUT_COORDINATES,
)
from gapdyn.dynamics.dissipation import (
    Contact,
    Damage,
    GapSample,
    Plastic,
    Pure,
    Separable,
    Viscous,
)
from gapdyn.dynamics.models import DamageModel, ElastoPlastic1D
from gapdyn.geometry.cones import as_constraint_set, tangent_cone_contains
from gapdyn.geometry.convex import IndicatorBox, prox
from gapdyn.geometry.phase_space import PhaseVector, dual_pairing


logger = logging.getLogger(__name__)

SCHEMES = {
    Pure: "symplectic_euler",
    Viscous: "viscous_prox",
    Plastic: "return_mapping",
    Damage: "damage_complementarity",
    Contact: "moreau_contact",
}


class StepError(RuntimeError):
    """A step could not be completed.

    Attributes:
        step_index (int): Index of the failed step.
        diagnostics (dict): Solver state at failure.
        partial (Trajectory): Trajectory up to the failed step, set by :func:`integrate`.
    """

    def __init__(self, message, step_index=None, diagnostics=None, partial=None):
        super(StepError, self).__init__(message)
        self.step_index = step_index
        self.diagnostics = diagnostics or {}
        self.partial = partial


class StepResult(object):
    """Outcome of one step.

    Attributes:
        z_next (PhaseVector): State at t_{n+1}.
        eta (PhaseVector): Gap vector selected by the stepper.
        z_dot (PhaseVector): Discrete rate in the stepper convention.
        z_state (PhaseVector): State slot of the information content.
        residual (float): I(z_state, z_dot, eta).
        solver_iterations (int): Fixed-point iterations, 0 for explicit updates.
        scheme (str): Scheme name.
    """

    def __init__(self, z_next, eta, z_dot, z_state, residual, solver_iterations=0, scheme=None):
        self.z_next = z_next
        self.eta = eta
        self.z_dot = z_dot
        self.z_state = z_state
        self.residual = float(residual)
        self.solver_iterations = int(solver_iterations)
        self.scheme = scheme

    def __repr__(self):
        return "StepResult(z_next={}, eta={}, residual={}, iterations={}, scheme={})".format(
            self.z_next, self.eta, self.residual, self.solver_iterations, self.scheme
        )


class _Rates(object):
    """Discrete rate, extracted gap and the gradients used for them."""

    def __init__(self, z_dot, eta, hp, hq, delta):
        self.z_dot = z_dot
        self.eta = eta
        self.hp = hp
        self.hq = hq
        # difference quotient of q minus the q_dot slot, nonzero only for overrides
        self.delta = delta


def _free_momentum(model, z_n, t, dt):
    return z_n.p - dt * model.partial_q(z_n.q, z_n.p, t)


def _discrete_rates(model, law, z_n, z_next, t, dt):
    q_star, p_star = z_n.q, z_next.p
    hp = np.array(model.partial_p(q_star, p_star, t), dtype=float)
    hq = np.array(model.partial_q(q_star, p_star, t), dtype=float)
    q_rate = (z_next.q - z_n.q) / dt
    p_rate = (z_next.p - z_n.p) / dt
    q_slot = q_rate.copy()
    if isinstance(law, Plastic):
        hq[1] = model.partial_q(z_next.q, z_next.p, t)[1]
    elif isinstance(law, Damage):
        q_slot[1] = hp[1]
    elif isinstance(law, Contact):
        e = law.restitution
        p_w = (z_next.p + e * _free_momentum(model, z_n, t, dt)) / (1.0 + e)
        hp = np.array(model.partial_p(q_star, p_w, t), dtype=float)
        q_slot = hp.copy()
    eta = PhaseVector(q_slot - hp, -p_rate - hq)
    return _Rates(PhaseVector(q_slot, p_rate), eta, hp, hq, q_rate - q_slot)


def discrete_gap_sample(model, law, z_n, z_next, t, dt):
    """State, rate, gap and information content of a discrete step.

    Args:
        model (HamiltonianModel): Model.
        law (DissipationLaw): Law.
        z_n (PhaseVector): State at t.
        z_next (PhaseVector): State at t + dt.
        t (float): Step start time.
        dt (float): Step size.

    Returns:
        GapSample: With ``z`` the end state, the stepper-convention rate and the extracted gap.
    """
    rates = _discrete_rates(model, law, z_n, z_next, t, dt)
    value = law.information_content(z_next, rates.z_dot, rates.eta)
    return GapSample(z_next, rates.z_dot, rates.eta, value)


def extract_eta(model, law, z_n, z_next, t, dt):
    """Gap vector of a discrete step, evaluated at the stepper's points."""
    return _discrete_rates(model, law, z_n, z_next, t, dt).eta


def _finish(model, law, z, z_next, eta, t, dt, iterations, scheme):
    rates = _discrete_rates(model, law, z, z_next, t, dt)
    residual = law.information_content(z_next, rates.z_dot, eta)
    return StepResult(z_next, eta, rates.z_dot, z_next, residual, iterations, scheme)


def _converged(new, old, tol):
    return np.max(np.abs(new - old)) <= tol * max(1.0, float(np.max(np.abs(new))))


def step_pure(model, z, t, dt, max_iter=DEFAULT_MAX_ITER, fp_tol=DEFAULT_FP_TOL, law=None):
    """Symplectic Euler step with eta = 0.

    p_{n+1} = p_n - dt dH/dq(q_n, p_{n+1}), q_{n+1} = q_n + dt dH/dp(q_n, p_{n+1}).
    The momentum update is explicit for separable H and a fixed-point
    iteration otherwise.

    Raises:
        StepError: If the fixed point does not converge in max_iter iterations.
    """
    law = law if law is not None else Pure()
    iterations = 0
    if model.is_separable:
        p_next = z.p - dt * model.partial_q(z.q, z.p, t)
    else:
        p_next = np.array(z.p)
        for iterations in range(1, max_iter + 1):
            p_new = z.p - dt * model.partial_q(z.q, p_next, t)
            done = _converged(p_new, p_next, fp_tol)
            p_next = p_new
            if done:
                break
        else:
            raise StepError(
                "symplectic Euler fixed point did not converge in {} iterations".format(max_iter),
                diagnostics={"t": t, "p": p_next.tolist()},
            )
    q_next = z.q + dt * model.partial_p(z.q, p_next, t)
    z_next = PhaseVector(q_next, p_next)
    return _finish(model, law, z, z_next, PhaseVector.zeros(z.dim), t, dt, iterations, SCHEMES[Pure])


def step_viscous(model, phi, z, t, dt, max_iter=DEFAULT_MAX_ITER, fp_tol=DEFAULT_FP_TOL, law=None):
    """Implicit viscous step, eta_p in d phi(q_dot_{n+1}) resolved through prox(phi).

    With s the largest inverse mass and p* = p_n - dt dH/dq, each iteration
    sets w = dH/dp(q_n, p) + s (p* - p), v = prox(phi, w, dt s),
    eta_p = (w - v)/(dt s) and p = p* - dt eta_p. At the fixed point
    v = dH/dp(q_n, p_{n+1}) and eta_p is in d phi(v). Two iterations suffice for
    quadratic kinetic energy.

    Args:
        phi (ConvexFunctionSpec or Viscous): Rayleigh potential on q_dot, or the law itself.

    Raises:
        StepError: If the fixed point does not converge in max_iter iterations.
    """
    if isinstance(phi, Viscous):
        law, phi = phi, phi.phi
    law = law if law is not None else Viscous(phi)
    law.check_model(model)
    s = float(np.max(model.inverse_mass))
    lam = dt * s
    p = np.array(z.p)
    for iterations in range(1, max_iter + 1):
        p_star = z.p - dt * model.partial_q(z.q, p, t)
        w = model.partial_p(z.q, p, t) + s * (p_star - p)
        v = prox(phi, w, lam)
        eta_p = (w - v) / lam
        p_new = p_star - dt * eta_p
        done = _converged(p_new, p, fp_tol)
        p = p_new
        if done:
            break
    else:
        raise StepError(
            "viscous fixed point did not converge in {} iterations".format(max_iter),
            diagnostics={"t": t, "p": p.tolist(), "eta_p": eta_p.tolist()},
        )
    q_next = z.q + dt * model.partial_p(z.q, p, t)
    eta = PhaseVector(np.zeros(z.dim), eta_p)
    return _finish(model, law, z, PhaseVector(q_next, p), eta, t, dt, iterations, SCHEMES[Viscous])


def step_plastic(model, yield_box, z, t, dt, law=None):
    """Elastic predictor and return mapping on the layout (q, q_I, p, p_I).

    1. p_{n+1} = p_n - dt (sigma_n - f(t_n)), q_{n+1} = q_n + dt p_{n+1}/m.
    2. sigma_tr = k (q_{n+1} - q_I,n); outside the yield box, q_I moves so that
       sigma_{n+1} = clip(sigma_tr).
    3. p_I advances by dt sigma_{n+1}.

    The gap is eta_q_I = (q_I,{n+1} - q_I,n)/dt, all other entries zero.

    Args:
        yield_box (IndicatorBox or Plastic): Yield set, or the law itself.
    """
    if isinstance(yield_box, Plastic):
        law, yield_box = yield_box, yield_box.yield_box
    if not isinstance(model, ElastoPlastic1D):
        raise TypeError("step_plastic needs an ElastoPlastic1D model, got {}".format(type(model).__name__))
    if not isinstance(yield_box, IndicatorBox):
        raise TypeError("step_plastic needs an IndicatorBox yield set")
    law = law if law is not None else Plastic(yield_box)
    (q, q_int), (p, p_int) = z.q, z.p
    lo, hi = float(yield_box.lo[0]), float(yield_box.hi[0])

    sigma = model.stress(q, q_int)
    p_next = p - dt * (sigma - model.f(t))
    q_next = q + dt * p_next / model.m
    sigma_trial = model.stress(q_next, q_int)
    q_int_next = q_int
    if sigma_trial > hi or sigma_trial < lo:
        q_int_next = q_int + (sigma_trial - min(max(sigma_trial, lo), hi)) / model.k
    sigma_next = model.stress(q_next, q_int_next)
    p_int_next = p_int + dt * sigma_next

    z_next = PhaseVector([q_next, q_int_next], [p_next, p_int_next])
    eta = PhaseVector([0.0, (q_int_next - q_int) / dt], [0.0, 0.0])
    return _finish(model, law, z, z_next, eta, t, dt, 0, SCHEMES[Plastic])


def step_damage(model, Y_threshold, z, t, dt, law=None):
    """Mechanical step with stiffness (1 - d_n) and a complementarity update of (d, r).

    With E = E0 q_n^2/2 and the trial r_tr = r_n + dt (E - Y):

    * r_tr <= 0: r_{n+1} = 0, d unchanged, eta_r = E + r_n/dt, which is E when
      r_n = 0 and never exceeds Y;
    * r_tr > 0: r_{n+1} = r_tr, eta_r = Y and d_{n+1} = min(d_n + dt r_tr/m_d, 1).

    The same complementarity holds on the saturated face d = 1. There d stays
    clamped and the ledger books the clamped rate as scheme drift.

    Args:
        Y_threshold (float or Damage): Damage threshold, or the law itself.
    """
    if isinstance(Y_threshold, Damage):
        law, Y_threshold = Y_threshold, Y_threshold.Y
    if not isinstance(model, DamageModel):
        raise TypeError("step_damage needs a DamageModel, got {}".format(type(model).__name__))
    law = law if law is not None else Damage(Y_threshold)
    Y = float(Y_threshold)
    (q, d), (p, r) = z.q, z.p

    p_next = p - dt * ((1.0 - d) * model.E0 * q - model.f(t))
    q_next = q + dt * p_next / model.m
    E = model.elastic_energy(q)
    r_trial = r + dt * (E - Y)
    if r_trial <= 0.0:
        d_next, r_next, eta_r = d, 0.0, min(E + r / dt, Y)
    else:
        d_next, r_next, eta_r = d + dt * r_trial / model.m_d, r_trial, Y
        if d_next >= 1.0 - law.feasibility_tol:
            if not law.is_saturated(z):
                logger.debug("damage saturates at t=%g", t + dt)
            d_next = 1.0

    z_next = PhaseVector([q_next, d_next], [p_next, r_next])
    eta = PhaseVector([0.0, 0.0], [0.0, eta_r])
    return _finish(model, law, z, z_next, eta, t, dt, 0, SCHEMES[Damage])


def step_contact(model, M, z, t, dt, restitution=0.0, law=None, contact_tol=1e-12):
    """Moreau catching-up step for unilateral constraints.

    The free step p_free = p_n - dt dH/dq(q_n), q_free = q_n + dt dH/dp(p_free) is
    kept when q_free is in M. Otherwise q_{n+1} = proj_M(q_free) and the velocity
    is the kinetic-metric projection of the free velocity under Newton's
    impact law, p_{n+1} = M v+, with reaction eta_p = -(p_{n+1} - p_n)/dt - dH/dq(q_n).

    Args:
        M (ConstraintSet or Contact): Constraint set, or the law itself.
        restitution (float): Newton coefficient, ignored when M is a law.
    """
    if isinstance(M, Contact):
        law, M = M, M.M
    M = as_constraint_set(M)
    law = law if law is not None else Contact(M, restitution=restitution)
    law.check_model(model)
    e = law.restitution

    hq = model.partial_q(z.q, z.p, t)
    p_free = z.p - dt * hq
    v_free = model.partial_p(z.q, p_free, t)
    q_free = z.q + dt * v_free
    if M.contains(q_free) and tangent_cone_contains(M, q_free, v_free, contact_tol):
        return _finish(model, law, z, PhaseVector(q_free, p_free), PhaseVector.zeros(z.dim), t, dt, 0, SCHEMES[Contact])

    q_next = M.project(q_free)
    inverse_mass = model.inverse_mass
    v_plus, _ = M.project_velocity(q_next, v_free, inverse_mass, e, tol=contact_tol)
    p_next = v_plus / inverse_mass
    eta_p = -(p_next - z.p) / dt - hq
    eta = PhaseVector(np.zeros(z.dim), eta_p)
    return _finish(model, law, z, PhaseVector(q_next, p_next), eta, t, dt, 1, SCHEMES[Contact])


def _stepper_for(law):
    if isinstance(law, Viscous):
        return lambda model, z, t, dt, **kw: step_viscous(model, law, z, t, dt, **kw)
    if isinstance(law, Plastic):
        return lambda model, z, t, dt, **kw: step_plastic(model, law, z, t, dt)
    if isinstance(law, Damage):
        return lambda model, z, t, dt, **kw: step_damage(model, law, z, t, dt)
    if isinstance(law, Contact):
        return lambda model, z, t, dt, **kw: step_contact(model, law, z, t, dt)
    if isinstance(law, Pure):
        return lambda model, z, t, dt, **kw: step_pure(model, z, t, dt, law=law, **kw)
    if isinstance(law, Separable):
        raise TypeError("no stepper for a general separable law; use viscous or plastic")
    raise TypeError("no stepper for law {!r}".format(law))


def scheme_name(law):
    for cls, name in SCHEMES.items():
        if type(law) is cls:
            return name
    raise TypeError("no stepper for law {!r}".format(law))


def _check_initial_state(model, law, z0):
    if z0.dim != model.dim:
        raise ValueError("initial state has dimension {} but the model expects {}".format(z0.dim, model.dim))
    if isinstance(law, Contact) and not law.M.contains(z0.q, law.feasibility_tol):
        raise ValueError("initial position {} violates the contact constraints".format(z0.q.tolist()))
    if isinstance(law, Damage):
        d, r = z0.q[1], z0.p[1]
        if not 0.0 <= d <= 1.0 or r < 0.0:
            raise ValueError("damage state needs d in [0, 1] and r >= 0, got d={}, r={}".format(d, r))


def _ledger_row(model, law, z, z_next, eta, t, dt):
    """dissipated, explicit, drift and remainder of one step."""
    rates = _discrete_rates(model, law, z, z_next, t, dt)
    g0 = np.concatenate([model.partial_p(z.q, z.p, t), model.partial_q(z.q, z.p, t)])
    g1 = np.concatenate([model.partial_p(z_next.q, z_next.p, t), model.partial_q(z_next.q, z_next.p, t)])
    n = z.dim
    hp_bar, hq_bar = 0.5 * (g0[:n] + g1[:n]), 0.5 * (g0[n:] + g1[n:])
    dissipated = (np.dot(hp_bar, eta.p) - np.dot(hq_bar, eta.q)) * dt
    explicit = model.energy(z_next, t + dt) - model.energy(z_next, t)
    drift = (np.dot(hq_bar, rates.hp) - np.dot(hp_bar, rates.hq) + np.dot(hq_bar, rates.delta)) * dt
    dz = z_next - z
    remainder = abs(np.dot(g1[:n] - g0[:n], dz.p) + np.dot(g1[n:] - g0[n:], dz.q))
    return float(dissipated), float(explicit), float(drift), float(remainder)


class Trajectory(object):
    """Discrete evolution on a uniform time grid.

    Attributes:
        times (np.array): t_0 < ... < t_N.
        states (list): N+1 phase vectors.
        etas (list): N gap vectors, eta_n belongs to the step from t_n.
        energies (np.array): H(z_n, t_n).
        residuals (np.array): Information content of every step.
        dissipated_work (np.array): Cumulative dissipated work, starts at 0. None for frames
            loaded without a model.
        layout (str): Block layout of the states.
        scheme (str): Stepper name.
    """

    def __init__(self, times, states, etas, energies, residuals, dissipated_work=None, layout="plain", scheme=None):
        self.times = np.asarray(times, dtype=float)
        self.states = list(states)
        self.etas = list(etas)
        self.energies = np.asarray(energies, dtype=float)
        self.residuals = np.asarray(residuals, dtype=float)
        self.dissipated_work = None if dissipated_work is None else np.asarray(dissipated_work, dtype=float)
        self.layout = layout
        self.scheme = scheme
        if not (len(self.times) == len(self.states) == len(self.etas) + 1 == len(self.energies)):
            raise ValueError("trajectory needs len(times) == len(states) == len(etas) + 1")
        if len(self.residuals) != len(self.etas):
            raise ValueError("trajectory needs one residual per step")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be increasing")

    def __len__(self):
        return len(self.states)

    @property
    def steps(self):
        return len(self.etas)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else None

    @property
    def final_state(self):
        return self.states[-1]

    def columns(self, layout=None):
        q_names, p_names = LAYOUT_COORDINATES[layout or self.layout]
        gap_names = ["eta_" + c for c in q_names + p_names]
        return [DEFAULT_TIME_COL] + list(q_names + p_names) + gap_names + [DEFAULT_ENERGY_COL, DEFAULT_RESIDUAL_COL]

    def to_frame(self, layout=None):
        """Table with one row per state; the last row has empty gaps.

        Returns:
            pd.DataFrame: Columns t, coordinates, gaps, H, I_residual.
        """
        n_rows = len(self.states)
        flat_states = np.array([z.flat() for z in self.states])
        gaps = np.full((n_rows, flat_states.shape[1]), np.nan)
        if self.etas:
            gaps[:-1] = np.array([eta.flat() for eta in self.etas])
        residuals = np.full(n_rows, np.nan)
        residuals[:-1] = self.residuals
        data = np.column_stack([self.times, flat_states, gaps, self.energies, residuals])
        return pd.DataFrame(data, columns=self.columns(layout))

    @classmethod
    def from_frame(cls, frame, layout=None, model=None, law=None):
        """Inverse of :meth:`to_frame`; dissipated work is rebuilt when model and law are given."""
        if layout is None:
            layout = "internal" if "q_I" in frame.columns else "damage" if "d" in frame.columns else "plain"
        q_names, p_names = LAYOUT_COORDINATES[layout]
        missing = [c for c in [DEFAULT_TIME_COL] + list(q_names + p_names) if c not in frame.columns]
        if missing:
            raise ValueError("trajectory frame is missing columns {}".format(missing))
        states = [PhaseVector(row[list(q_names)].values, row[list(p_names)].values) for _, row in frame.iterrows()]
        gap_q = ["eta_" + c for c in q_names]
        gap_p = ["eta_" + c for c in p_names]
        etas = [PhaseVector(row[gap_q].values, row[gap_p].values) for _, row in frame.iloc[:-1].iterrows()]
        energies = frame[DEFAULT_ENERGY_COL].values if DEFAULT_ENERGY_COL in frame else np.full(len(frame), np.nan)
        residuals = (
            frame[DEFAULT_RESIDUAL_COL].values[:-1] if DEFAULT_RESIDUAL_COL in frame else np.zeros(len(etas))
        )
        traj = cls(frame[DEFAULT_TIME_COL].values, states, etas, energies, residuals, layout=layout)
        if model is not None and law is not None:
            traj.dissipated_work = np.concatenate([[0.0], np.cumsum(traj.ledger(model, law)["dissipated"].values)])
        return traj

    def ledger(self, model, law):
        """Per-step energy ledger.

        Columns: t, H, dH, dissipated, explicit, imbalance = dH - explicit + dissipated,
        drift (scheme drift of symplectic Euler and the rate overrides) and
        remainder (second-order allowance |<<DH(z_{n+1}) - DH(z_n), dz>>|).

        Returns:
            pd.DataFrame: One row per step.
        """
        rows = []
        for k, eta in enumerate(self.etas):
            t, z, z_next = self.times[k], self.states[k], self.states[k + 1]
            dt = self.times[k + 1] - t
            dissipated, explicit, drift, remainder = _ledger_row(model, law, z, z_next, eta, t, dt)
            H0 = model.energy(z, t)
            dH = model.energy(z_next, t + dt) - H0
            rows.append((t, H0, dH, dissipated, explicit, dH - explicit + dissipated, drift, remainder))
        return pd.DataFrame(
            rows, columns=["t", "H", "dH", "dissipated", "explicit", "imbalance", "drift", "remainder"]
        )


def integrate(
    model,
    law,
    z0,
    t0,
    T,
    dt,
    step_tolerance=DEFAULT_STEP_TOL,
    max_iter=DEFAULT_MAX_ITER,
    fp_tol=DEFAULT_FP_TOL,
    progress=False,
):
    """Integrate a model under a dissipation law on a uniform grid.

    The stepper is chosen by law type: Pure, Viscous, Plastic, Damage or
    Contact. The grid has ceil((T - t0)/dt) steps; T == t0 gives a single state.

    Args:
        model (HamiltonianModel): Model.
        law (DissipationLaw): Law, compatible with the model layout.
        z0 (PhaseVector): Admissible initial state.
        t0 (float): Start time.
        T (float): End time.
        dt (float): Step size.
        step_tolerance (float): Largest accepted per-step information content.
        max_iter (int): Fixed-point iteration cap.
        fp_tol (float): Fixed-point tolerance on successive iterates.
        progress (bool): Show a tqdm progress bar.

    Returns:
        Trajectory: The run.

    Raises:
        ValueError: On bad arguments or an inadmissible initial state.
        TypeError: If the law has no stepper or does not fit the model.
        StepError: If a step fails; ``partial`` holds the trajectory so far.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0, got {}".format(dt))
    if T < t0:
        raise ValueError("T must be >= t0, got T={} and t0={}".format(T, t0))
    law.check_model(model)
    stepper = _stepper_for(law)
    scheme = scheme_name(law)
    _check_initial_state(model, law, z0)
    n_steps = int(np.ceil((T - t0) / dt - 1e-9))
    logger.info("integrating %s under %s with %s: %d steps of %g", model.tag, law.tag, scheme, n_steps, dt)

    times = [float(t0)]
    states = [z0]
    etas = []
    energies = [model.energy(z0, t0)]
    residuals = []
    work = [0.0]

    def partial():
        return Trajectory(times, states, etas, energies, residuals, work, model.layout, scheme)

    z = z0
    for k in tqdm(range(n_steps), disable=not progress, desc=scheme, leave=False):
        t = t0 + k * dt
        try:
            result = stepper(model, z, t, dt, max_iter=max_iter, fp_tol=fp_tol)
        except StepError as e:
            e.step_index = k
            e.partial = partial()
            raise
        if not result.residual <= step_tolerance:
            raise StepError(
                "step {} at t={:g} has information content {:.3e} above tolerance {:.1e}".format(
                    k, t, result.residual, step_tolerance
                ),
                step_index=k,
                diagnostics={"t": t, "residual": result.residual, "state": z.flat().tolist()},
                partial=partial(),
            )
        t_next = t0 + (k + 1) * dt
        dissipated = _ledger_row(model, law, z, result.z_next, result.eta, t, dt)[0]
        z = result.z_next
        times.append(t_next)
        states.append(z)
        etas.append(result.eta)
        energies.append(model.energy(z, t_next))
        residuals.append(result.residual)
        work.append(work[-1] + dissipated)
    return partial()


def convergence_study(model, law, z0, t0, T, dts, reference_factor=64, reference=None, **kwargs):
    """L-infinity state errors for a sequence of step sizes.

    The reference is ``reference(t)`` returning the flat state when given,
    otherwise a run at min(dts)/reference_factor. Every dt must be an integer
    multiple of the reference step.

    Returns:
        pd.DataFrame: Columns dt, error and ratio (error of the previous, larger dt
        over this one; NaN on the first row).
    """
    dts = sorted((float(d) for d in dts), reverse=True)
    if reference is None:
        dt_ref = dts[-1] / reference_factor
        ref = integrate(model, law, z0, t0, T, dt_ref, **kwargs)
        ref_states = np.array([z.flat() for z in ref.states])
    errors = []
    for dt in dts:
        traj = integrate(model, law, z0, t0, T, dt, **kwargs)
        states = np.array([z.flat() for z in traj.states])
        if reference is None:
            stride = int(round(dt / dt_ref))
            if abs(stride * dt_ref - dt) > 1e-9 * dt:
                raise ValueError("dt={} is not a multiple of the reference step {}".format(dt, dt_ref))
            expected = ref_states[::stride][: len(states)]
        else:
            expected = np.array([reference(t) for t in traj.times])
        errors.append(float(np.max(np.abs(states - expected))))
    errors = np.array(errors)
    ratios = np.concatenate([[np.nan], errors[:-1] / errors[1:]])
    return pd.DataFrame({"dt": dts, "error": errors, "ratio": ratios})


def convergence_order(frame):
    """Slope of log(error) against log(dt), fitted with scipy.stats.linregress."""
    fit = linregress(np.log(frame["dt"].values), np.log(frame["error"].values))
    return float(fit.slope)
