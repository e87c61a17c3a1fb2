# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

"""A posteriori audits of trajectories: gap functional, likelihood oracle,
energy ledger and the family invariants of the dissipation laws."""

import json
import logging

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from gapdyn.common.constants import (
    DEFAULT_ENERGY_SLACK_RATE,
    DEFAULT_ORACLE_GRID,
    DEFAULT_ORACLE_POINTS,
    DEFAULT_STEP_TOL,
    MAX_ORACLE_COORDINATES,
)
from gapdyn.common.python_utils import INF
from gapdyn.dynamics.dissipation import Contact, Damage, Plastic, Viscous, grid_minimize
from gapdyn.dynamics.integrators import discrete_gap_sample
from gapdyn.dynamics.models import ElastoPlastic1D
from gapdyn.geometry.convex import IndicatorBox
from gapdyn.geometry.phase_space import PhaseVector


logger = logging.getLogger(__name__)

YIELD_SLACK = 1e-9
DAMAGE_MONOTONE_SLACK = 1e-12
PENETRATION_SLACK = 1e-12
COMPLEMENTARITY_TOL = 1e-9
WORK_SLACK = 1e-9


def _check_trajectory(trajectory, model):
    for k, z in enumerate(trajectory.states):
        if z.dim != model.dim:
            raise ValueError(
                "state {} has dimension {} but {} expects {}".format(k, z.dim, type(model).__name__, model.dim)
            )


def _samples(trajectory, model, law):
    for k, eta in enumerate(trajectory.etas):
        t, t_next = trajectory.times[k], trajectory.times[k + 1]
        yield k, t_next - t, eta, discrete_gap_sample(
            model, law, trajectory.states[k], trajectory.states[k + 1], t, t_next - t
        )


def gap_functional(trajectory, model, law):
    """Discrete gap functional G = sum_n I(z_n, z_dot_n, eta_n) dt.

    States and rates follow the stepper convention of
    :func:`gapdyn.dynamics.integrators.discrete_gap_sample`; eta is the stored gap.

    Args:
        trajectory (Trajectory): Run, from integrate or loaded from CSV.
        model (HamiltonianModel): Model of the run.
        law (DissipationLaw): Law of the run.

    Returns:
        float: G >= 0, or +inf when a step violates a hard constraint.
    """
    _check_trajectory(trajectory, model)
    total = 0.0
    for k, dt, eta, sample in _samples(trajectory, model, law):
        value = law.information_content(sample.z, sample.z_dot, eta)
        if value == INF:
            logger.debug("gap functional is infinite at step %d", k)
            return INF
        total += value * dt
    return max(total, 0.0)


class BruteForceResult(object):
    """Grid minimum of I over the active gap coordinates.

    Attributes:
        eta_star (PhaseVector): Minimal-norm minimizer, or the refined point when it beats the grid.
        I_star (float): Smallest information content found.
        minimizers (np.array): Flat gap vectors of the minimizer set, one per row.
        cell (float): Grid spacing.
        coordinates (list): Searched flat indices of [eta_q; eta_p].
    """

    def __init__(self, eta_star, I_star, minimizers, cell, coordinates):
        self.eta_star = eta_star
        self.I_star = float(I_star)
        self.minimizers = minimizers
        self.cell = float(cell)
        self.coordinates = list(coordinates)

    def __iter__(self):
        return iter((self.eta_star, self.I_star))

    def __repr__(self):
        return "BruteForceResult(eta_star={}, I_star={}, minimizers={}, cell={})".format(
            self.eta_star, self.I_star, len(self.minimizers), self.cell
        )


def brute_force_gap(
    law,
    z,
    z_dot,
    grid=DEFAULT_ORACLE_GRID,
    points=DEFAULT_ORACLE_POINTS,
    base_eta=None,
    refine=True,
    tol=1e-9,
):
    """Exhaustive oracle: minimize I(z, z_dot, .) over a grid of gap vectors.

    Only the law's active gap coordinates are searched, the others are taken
    from base_eta (zero by default). The best grid point is polished with
    scipy so that I_star reaches the true infimum on smooth laws.

    Args:
        law (DissipationLaw): Law.
        z (PhaseVector): State.
        z_dot (PhaseVector): Rate.
        grid (tuple): (lo, hi) per coordinate.
        points (int): Grid points per coordinate.
        base_eta (PhaseVector): Values of the inactive coordinates.
        refine (bool): Polish the grid minimum.
        tol (float): Grid points within tol of the grid minimum form the minimizer set.

    Returns:
        BruteForceResult: Also unpacks as (eta_star, I_star).

    Raises:
        ValueError: If the law has more than three active gap coordinates.
    """
    coords = law.active_gap_coordinates(z.dim)
    if len(coords) > MAX_ORACLE_COORDINATES:
        raise ValueError(
            "brute force search over {} gap coordinates exceeds the limit of {}".format(
                len(coords), MAX_ORACLE_COORDINATES
            )
        )
    base = base_eta if base_eta is not None else PhaseVector.zeros(z.dim)
    if not coords:
        value = law.information_content(z, z_dot, base)
        return BruteForceResult(base, value, base.flat()[None, :], 0.0, coords)

    lo, hi = grid
    cell = (hi - lo) / (points - 1)
    flat = base.flat()

    def assemble(x):
        v = flat.copy()
        v[coords] = x
        return v

    def objective(x):
        return law.information_content(z, z_dot, PhaseVector.from_flat(assemble(x)))

    grid_x, values, best_x, best_value = grid_minimize(objective, len(coords), lo, hi, points, refine)
    grid_min = float(np.min(values))
    if grid_min == INF:
        logger.debug("every grid point has infinite information content")
        return BruteForceResult(base, INF, np.empty((0, flat.size)), cell, coords)
    selected = grid_x[values <= grid_min + tol * (1.0 + abs(grid_min))]
    minimizers = np.array([assemble(x) for x in selected])
    if best_value < grid_min - tol * (1.0 + abs(grid_min)):
        eta_star = assemble(best_x)
        minimizers = np.vstack([minimizers, eta_star])
    else:
        eta_star = minimizers[int(np.argmin(np.linalg.norm(minimizers, axis=1)))]
    return BruteForceResult(PhaseVector.from_flat(eta_star), min(best_value, grid_min), minimizers, cell, coords)


def within_argmin(eta, result, cells=1):
    """True iff eta lies within ``cells`` grid cells (max norm) of the minimizer set."""
    if result.minimizers.size == 0:
        return False
    distance = np.min(np.max(np.abs(result.minimizers - eta.flat()[None, :]), axis=1))
    return bool(distance <= cells * result.cell + 1e-12)


class Violation(object):
    def __init__(self, step, invariant, magnitude):
        self.step = None if step is None else int(step)
        self.invariant = invariant
        self.magnitude = float(magnitude)

    def to_dict(self):
        return {"step": self.step, "invariant": self.invariant, "magnitude": self.magnitude}

    def __repr__(self):
        return "Violation(step={}, invariant={!r}, magnitude={:.3e})".format(self.step, self.invariant, self.magnitude)


class AuditReport(object):
    """Findings of :func:`energy_audit`.

    Attributes:
        gap_functional_value (float): Discrete gap functional.
        max_step_residual (float): Largest per-step information content.
        energy_ledger (pd.DataFrame): Per-step ledger of the run.
        violations (list): Violation entries, empty on accepted runs.
        ledger_closure (float): Relative closure of the energy balance net of scheme drift.
        steps (int): Number of steps.
    """

    def __init__(self, gap_functional_value, max_step_residual, energy_ledger, violations, ledger_closure, steps):
        self.gap_functional_value = gap_functional_value
        self.max_step_residual = max_step_residual
        self.energy_ledger = energy_ledger
        self.violations = violations
        self.ledger_closure = ledger_closure
        self.steps = steps

    @property
    def ok(self):
        return not self.violations

    def invariants(self):
        """Names of the violated invariants."""
        return sorted({v.invariant for v in self.violations})

    def to_dict(self):
        drift = float(self.energy_ledger["drift"].sum()) if len(self.energy_ledger) else 0.0
        return {
            "gap_functional": None if self.gap_functional_value == INF else self.gap_functional_value,
            "max_step_residual": None if self.max_step_residual == INF else self.max_step_residual,
            "violations": [v.to_dict() for v in self.violations],
            "ledger_closure": self.ledger_closure,
            "scheme_drift": drift,
            "steps": self.steps,
        }

    def to_json(self, path=None):
        """JSON text of the report, also written to path when given."""
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as f:
                f.write(text + "\n")
        return text


def ledger_closure(ledger):
    """|sum(imbalance - drift)| / max(1, max|H|) of an energy ledger."""
    if len(ledger) == 0:
        return 0.0
    net = float((ledger["imbalance"] - ledger["drift"]).sum())
    return abs(net) / max(1.0, float(ledger["H"].abs().max()))


def _family_violations(trajectory, model, law):
    found = []
    if isinstance(law, Plastic) and isinstance(law.phi, IndicatorBox):
        lo, hi = float(law.phi.lo[0]), float(law.phi.hi[0])
        for k, z in enumerate(trajectory.states):
            sigma = model.stress(z.q[0], z.q[1])
            excess = max(lo - sigma, sigma - hi)
            if excess > YIELD_SLACK:
                found.append(Violation(k, "yield_surface", excess))
    elif isinstance(law, Damage):
        d = np.array([z.q[1] for z in trajectory.states])
        for k in np.flatnonzero(np.diff(d) < -DAMAGE_MONOTONE_SLACK):
            found.append(Violation(k, "damage_monotone", d[k] - d[k + 1]))
        for k in np.flatnonzero((d < 0.0) | (d > 1.0)):
            found.append(Violation(k, "damage_bounds", max(-d[k], d[k] - 1.0)))
        for k, eta in enumerate(trajectory.etas):
            if eta.p[1] > law.Y + YIELD_SLACK:
                found.append(Violation(k, "damage_threshold", eta.p[1] - law.Y))
    elif isinstance(law, Contact):
        for k, z in enumerate(trajectory.states):
            depth = -float(np.min(law.M.gaps(z.q)))
            if depth > PENETRATION_SLACK:
                found.append(Violation(k, "penetration", depth))
        for k, _, eta, sample in _samples(trajectory, model, law):
            power = abs(float(np.dot(sample.z_dot.q, eta.p)))
            if power > COMPLEMENTARITY_TOL:
                found.append(Violation(k, "complementarity", power))
    return found


def energy_audit(
    trajectory,
    model,
    law,
    step_tolerance=DEFAULT_STEP_TOL,
    slack_rate=DEFAULT_ENERGY_SLACK_RATE,
):
    """Energy ledger and invariant audit of a run.

    A step is flagged when its energy imbalance, net of the scheme drift,
    exceeds slack_rate*dt plus the second-order remainder of the step. Family
    invariants (yield surface, damage monotonicity and bounds, penetration,
    complementarity), step residuals and the sign of the cumulative
    dissipated work are reported as well.

    Args:
        trajectory (Trajectory): Run.
        model (HamiltonianModel): Model of the run.
        law (DissipationLaw): Law of the run.
        step_tolerance (float): Largest accepted per-step residual.
        slack_rate (float): Energy slack per unit time.

    Returns:
        AuditReport: Findings.
    """
    _check_trajectory(trajectory, model)
    ledger = trajectory.ledger(model, law)
    violations = []

    dts = np.diff(trajectory.times)
    excess = (ledger["imbalance"] - ledger["drift"]).values
    allowance = slack_rate * dts + ledger["remainder"].values
    for k in np.flatnonzero(excess > allowance):
        violations.append(Violation(k, "energy_increase", excess[k] - allowance[k]))

    for k in np.flatnonzero(~(trajectory.residuals <= step_tolerance)):
        violations.append(Violation(k, "step_residual", trajectory.residuals[k]))

    if isinstance(law, (Viscous, Plastic, Damage)) and len(ledger):
        work = np.cumsum(ledger["dissipated"].values)
        for k in np.flatnonzero(work < -WORK_SLACK):
            violations.append(Violation(k, "dissipated_work", -work[k]))

    violations.extend(_family_violations(trajectory, model, law))
    violations.sort(key=lambda v: (v.step if v.step is not None else -1, v.invariant))

    report = AuditReport(
        gap_functional(trajectory, model, law),
        float(np.max(trajectory.residuals)) if trajectory.steps else 0.0,
        ledger,
        violations,
        ledger_closure(ledger),
        trajectory.steps,
    )
    logger.info(
        "audit: %d steps, G=%.3e, max residual %.3e, %d violations",
        report.steps,
        report.gap_functional_value,
        report.max_step_residual,
        len(violations),
    )
    return report


def hysteresis_loop(trajectory, model):
    """Plot-ready sigma-q loop of an elasto-plastic run.

    Returns:
        pd.DataFrame: Columns t, q, q_I, sigma and plastic_work, the cumulative
        sum of sigma_{n+1} (q_I,{n+1} - q_I,n).

    Raises:
        TypeError: If the model is not ElastoPlastic1D.
    """
    if not isinstance(model, ElastoPlastic1D):
        raise TypeError("hysteresis loops need an ElastoPlastic1D model, got {}".format(type(model).__name__))
    q = np.array([z.q[0] for z in trajectory.states])
    q_int = np.array([z.q[1] for z in trajectory.states])
    sigma = model.stress(q, q_int)
    work = np.concatenate([[0.0], np.cumsum(sigma[1:] * np.diff(q_int))])
    return pd.DataFrame({"t": trajectory.times, "q": q, "q_I": q_int, "sigma": sigma, "plastic_work": work})


def hysteresis_loop_area(frame):
    """Trapezoid value of the line integral of sigma dq along the loop."""
    return float(trapezoid(frame["sigma"].values, frame["q"].values))
