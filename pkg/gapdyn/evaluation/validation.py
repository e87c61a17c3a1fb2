# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

"""Property suites run by ``gapdyn validate``.

Each suite counts checks and collects failure messages; a suite passes when
no check failed. Sampled suites draw from a generator seeded per suite, so a
fixed seed gives identical results on every run.
"""

import logging
from collections import OrderedDict

import numpy as np

from gapdyn.common.constants import DEFAULT_FD_RTOL, DEFAULT_STEP_TOL, SEED
from gapdyn.common.python_utils import INF, relative_error
from gapdyn.common.timer import Timer
from gapdyn.config.scenario import prepare_scenario
from gapdyn.dynamics.dissipation import (
    Contact,
    Damage,
    Plastic,
    Pure,
    Separable,
    Viscous,
    axioms_check,
    bipotential_equivalence_check,
    subgradient_inclusion_holds,
    zero_gap_holds,
)
from gapdyn.dynamics.forcing import Constant, Sinusoid
from gapdyn.dynamics.integrators import (
    convergence_study,
    discrete_gap_sample,
    integrate,
    step_contact,
    step_damage,
    step_plastic,
    step_pure,
    step_viscous,
)
from gapdyn.dynamics.models import (
    ContactBall,
    DamageModel,
    ElastoPlastic1D,
    HarmonicOscillator,
    Pendulum,
    random_state,
)
from gapdyn.evaluation.diagnostics import (
    brute_force_gap,
    energy_audit,
    hysteresis_loop,
    hysteresis_loop_area,
    within_argmin,
)
from gapdyn.geometry.cones import ConstraintSet, HalfSpace
from gapdyn.geometry.convex import (
    IndicatorBox,
    IndicatorPoint,
    Linear,
    Quadratic,
    SeparableProduct,
    Sum,
    SupportBox,
    conjugate_comparison,
    cyclically_monotone_check,
    fenchel_gap,
    n_monotone_check,
    polar,
    prox,
)
from gapdyn.geometry.phase_space import PhaseVector, finite_difference_gradient, gradient


logger = logging.getLogger(__name__)

SUITES = OrderedDict()

FENCHEL_TOL = 1e-9
ORACLE_I_TOL = 1e-6
ORACLE_RESIDUAL_TOL = 1e-8
CONVERGENCE_RATIO = (1.7, 2.3)


class SuiteResult(object):
    """Outcome of one suite.

    Attributes:
        name (str): Suite name.
        checks (int): Number of checks made.
        failures (list): Messages of the failed checks.
        details (dict): Summary numbers, JSON serializable.
    """

    def __init__(self, name):
        self.name = name
        self.checks = 0
        self.failures = []
        self.details = OrderedDict()

    def check(self, ok, message):
        self.checks += 1
        if not ok:
            self.failures.append(message)
        return ok

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": self.checks,
            "failures": list(self.failures),
            "details": dict(self.details),
        }


def suite(name):
    """Register a suite function under name."""

    def register(func):
        SUITES[name] = func
        return func

    return register


def shipped_specs():
    """One-dimensional specs with closed-form polars covered by the suites."""
    return OrderedDict(
        [
            ("quadratic", Quadratic(1.0)),
            ("quadratic_shifted", Quadratic(2.0, 0.5)),
            ("linear", Linear(0.7)),
            ("indicator_point", IndicatorPoint(0.0)),
            ("indicator_box", IndicatorBox(-1.0, 1.0)),
            ("support_box", SupportBox.symmetric(1.0)),
            ("damage_potential", Sum([IndicatorBox(0.0, INF), Linear(0.5)])),
            ("damage_polar", SupportBox(0.0, INF, shift=0.5)),
            ("quadratic_plus_linear", Sum([Quadratic(1.5), Linear(-0.3)])),
        ]
    )


def subgradient_pair(f, v):
    """(x, y) with y in df(x), through the Moreau decomposition x = prox(f, v, 1), y = v - x."""
    x = prox(f, np.atleast_1d(v), 1.0)
    return x, np.atleast_1d(v) - x


def _floor_grid(eta, base=5.0):
    span = max(base, 2.0 * float(np.max(np.abs(eta.flat()))))
    return (-span, span)


@suite("fenchel")
def fenchel_suite(result, rng, quick):
    samples = 1000 if quick else 10000
    for name, f in shipped_specs().items():
        f_star = polar(f)
        xs = rng.uniform(-10.0, 10.0, samples)
        ys = rng.uniform(-10.0, 10.0, samples)
        gaps = np.array([fenchel_gap(f, [x], [y], f_star) for x, y in zip(xs, ys)])
        negative = int(np.sum(gaps < -FENCHEL_TOL))
        result.check(negative == 0, "{}: {} negative Fenchel gaps".format(name, negative))
        equality = []
        for v in rng.uniform(-10.0, 10.0, samples):
            x, y = subgradient_pair(f, v)
            equality.append(fenchel_gap(f, x, y, f_star))
        worst = float(np.max(equality))
        result.check(worst <= FENCHEL_TOL, "{}: gap {:.3e} on the subdifferential graph".format(name, worst))
        result.details[name] = worst


@suite("conjugate_oracle")
def conjugate_oracle_suite(result, rng, quick):
    samples = 401 if quick else 1001
    spacing = 10.0 / (samples - 1)
    specs = shipped_specs()
    for name in ("quadratic", "indicator_point", "indicator_box", "support_box", "damage_potential"):
        table = conjugate_comparison(specs[name], -5.0, 5.0, samples)
        finite = np.isfinite(table["phi_star_closed_form"].values)
        bound = 2.0 * spacing * (1.0 + np.abs(table["y"].values[finite]))
        excess = table["abs_diff"].values[finite] - bound
        worst = float(np.max(excess)) if excess.size else 0.0
        result.check(worst <= 0.0, "{}: numeric conjugate off by {:.3e} beyond the grid bound".format(name, worst))
        result.details[name] = float(np.max(table["abs_diff"].values[finite]))


@suite("pure_hamiltonian")
def pure_hamiltonian_suite(result, rng, quick):
    overrides = {"T": 10.0} if quick else {}
    scenario = prepare_scenario("pure_oscillator", **overrides)
    traj = scenario.integrate()
    model, z0 = scenario.model, scenario.z0
    result.check(all(not np.any(eta.flat()) for eta in traj.etas), "pure stepper produced a nonzero gap")
    H0 = traj.energies[0]
    drift = float(np.max(np.abs(traj.energies - H0)) / abs(H0))
    result.check(drift <= 1e-3, "relative energy drift {:.3e} above 1e-3".format(drift))
    omega = np.sqrt(model.k / model.m)
    t = traj.times - scenario.t0
    q = z0.q[0] * np.cos(omega * t) + z0.p[0] / (model.m * omega) * np.sin(omega * t)
    p = -model.m * omega * z0.q[0] * np.sin(omega * t) + z0.p[0] * np.cos(omega * t)
    states = np.array([z.flat() for z in traj.states])
    error = float(np.max(np.abs(states - np.column_stack([q, p]))))
    result.check(error <= 1e-2, "L-inf error {:.3e} against the analytic solution".format(error))
    result.details.update({"energy_drift": drift, "error": error, "steps": traj.steps})


def damped_solution(model, c, z0, t):
    """Closed-form underdamped oscillator with viscous force c q_dot."""
    omega0 = np.sqrt(model.k / model.m)
    zeta = c / (2.0 * np.sqrt(model.k * model.m))
    if zeta >= 1.0:
        raise ValueError("closed form needs an underdamped oscillator, got zeta={}".format(zeta))
    omega_d = omega0 * np.sqrt(1.0 - zeta ** 2)
    q0, v0 = z0.q[0], z0.p[0] / model.m
    decay = np.exp(-zeta * omega0 * t)
    cos, sin = np.cos(omega_d * t), np.sin(omega_d * t)
    q = decay * (q0 * cos + (v0 + zeta * omega0 * q0) / omega_d * sin)
    v = decay * (v0 * cos - (omega0 ** 2 * q0 + zeta * omega0 * v0) / omega_d * sin)
    return q, model.m * v


@suite("viscosity")
def viscosity_suite(result, rng, quick):
    overrides = {"T": 2.0} if quick else {}
    scenario = prepare_scenario("damped_oscillator", **overrides)
    traj = scenario.integrate()
    q, p = damped_solution(scenario.model, scenario.law.phi.a, scenario.z0, traj.times - scenario.t0)
    states = np.array([z.flat() for z in traj.states])
    error = float(np.max(np.abs(states - np.column_stack([q, p]))))
    result.check(error <= 5e-3, "L-inf error {:.3e} against the damped solution".format(error))
    worst = float(np.max(traj.residuals))
    result.check(worst <= 1e-8, "step residual {:.3e} above 1e-8".format(worst))
    ledger = traj.ledger(scenario.model, scenario.law)
    rise = float(np.max(ledger["dH"] - ledger["drift"]))
    result.check(rise <= 1e-9, "energy rose by {:.3e} net of scheme drift".format(rise))
    result.details.update({"error": error, "max_residual": worst, "max_energy_rise": rise})


def _oracle_agrees(result, law, sample, eta, label):
    found = brute_force_gap(law, sample.z, sample.z_dot, grid=_floor_grid(eta))
    result.check(within_argmin(eta, found), "{}: stepper gap {} is not within one cell of the argmin".format(label, eta))
    result.check(
        found.I_star <= ORACLE_I_TOL, "{}: oracle minimum {:.3e} above {:.0e}".format(label, found.I_star, ORACLE_I_TOL)
    )
    return found


@suite("plasticity")
def plasticity_suite(result, rng, quick):
    overrides = {"dt": 1e-3} if quick else {}
    scenario = prepare_scenario("plastic_cycle", **overrides)
    model, law = scenario.model, scenario.law
    traj = scenario.integrate()
    audit = energy_audit(traj, model, law, scenario.step_tolerance)
    result.check(audit.ok, "audit violations: {}".format(audit.invariants()))
    Y = float(law.yield_box.hi[0])
    sigma = np.array([model.stress(z.q[0], z.q[1]) for z in traj.states])
    result.check(np.max(np.abs(sigma)) <= Y + 1e-9, "stress {:.12g} beyond the yield surface".format(np.max(np.abs(sigma))))
    result.check(np.min(traj.dissipated_work) >= -1e-9, "negative cumulative plastic work")

    loop = hysteresis_loop(traj, model)
    area = hysteresis_loop_area(loop)
    plastic = float(loop["plastic_work"].iloc[-1])
    elastic = (sigma[-1] ** 2 - sigma[0] ** 2) / (2.0 * model.k)
    result.check(plastic > 0, "the load never reached the yield surface")
    mismatch = abs(area - (plastic + elastic)) / max(plastic, 1e-12)
    result.check(mismatch <= 0.02, "loop area {:.6g} vs plastic work {:.6g}: {:.2%}".format(area, plastic, mismatch))

    yielding = np.flatnonzero(np.diff(loop["q_I"].values) != 0.0)
    picks = list(rng.choice(yielding, min(10, yielding.size), replace=False)) if yielding.size else []
    picks += list(rng.choice(traj.steps, 20 - len(picks), replace=False))
    for k in picks:
        sample = discrete_gap_sample(model, law, traj.states[k], traj.states[k + 1], traj.times[k], scenario.dt)
        _oracle_agrees(result, law, sample, traj.etas[k], "step {}".format(k))
    result.details.update(
        {"loop_area": area, "plastic_work": plastic, "mismatch": mismatch, "max_stress": float(np.max(np.abs(sigma)))}
    )


def _damage_checks(result, model, law, traj, step_tolerance, label):
    audit = energy_audit(traj, model, law, step_tolerance)
    result.check(audit.ok, "{}: audit violations: {}".format(label, audit.invariants()))
    d = np.array([z.q[1] for z in traj.states])
    E = np.array([model.elastic_energy(z.q[0]) for z in traj.states])
    d_rate = np.diff(d) / np.diff(traj.times)
    result.check(np.all(np.diff(d) >= -1e-12), "{}: damage decreased".format(label))
    result.check(np.all((d >= 0.0) & (d <= 1.0)), "{}: damage left [0, 1]".format(label))
    below = E[:-1] < law.Y
    growth = float(np.max(d_rate[below])) if below.any() else 0.0
    result.check(growth <= 1e-12, "{}: damage rate {:.3e} below the threshold".format(label, growth))
    eta_r = np.array([eta.p[1] for eta in traj.etas])
    worst = float(np.max(eta_r - law.Y)) if len(eta_r) else -law.Y
    result.check(worst <= 1e-9, "{}: eta_r exceeds Y by {:.3e}".format(label, worst))
    return d, worst


@suite("damage")
def damage_suite(result, rng, quick):
    overrides = {"dt": 1e-2} if quick else {}
    scenario = prepare_scenario("damage_growth", **overrides)
    d, worst = _damage_checks(
        result, scenario.model, scenario.law, scenario.integrate(), scenario.step_tolerance, "growth"
    )
    result.check(d[-1] > 0.0, "the elastic energy never crossed the threshold")

    # a light damage variable under constant load reaches d = 1 early in the run
    model, law = DamageModel(m=1.0, m_d=0.1, E0=1.0, f=Constant(2.0)), Damage(0.5)
    traj = integrate(model, law, PhaseVector([0.0, 0.0], [0.0, 0.0]), 0.0, 3.0, 1e-3)
    saturated, worst_saturated = _damage_checks(result, model, law, traj, DEFAULT_STEP_TOL, "saturation")
    result.check(saturated[-1] == 1.0, "damage stopped at {:.6f} under saturating load".format(saturated[-1]))
    result.details.update(
        {
            "final_damage": float(d[-1]),
            "max_eta_r_excess": max(worst, worst_saturated),
            "saturation_time": float(traj.times[int(np.argmax(saturated >= 1.0))]),
        }
    )


@suite("contact")
def contact_suite(result, rng, quick):
    scenario = prepare_scenario("bouncing_ball")
    model, law = scenario.model, scenario.law
    traj = scenario.integrate()
    audit = energy_audit(traj, model, law, scenario.step_tolerance)
    result.check(audit.ok, "audit violations: {}".format(audit.invariants()))
    depth = float(max(-np.min(law.M.gaps(z.q)) for z in traj.states))
    result.check(depth <= 1e-12, "penetration {:.3e}".format(depth))
    polar_law = Contact(law.M, law.restitution, form="polar", feasibility_tol=law.feasibility_tol)
    power, mismatch = 0.0, 0
    for k, eta in enumerate(traj.etas):
        sample = discrete_gap_sample(model, law, traj.states[k], traj.states[k + 1], traj.times[k], scenario.dt)
        power = max(power, abs(float(np.dot(sample.z_dot.q, eta.p))))
        mismatch += law.information_content(sample.z, sample.z_dot, eta) != polar_law.information_content(
            sample.z, sample.z_dot, eta
        )
    result.check(power <= 1e-9, "complementarity defect {:.3e}".format(power))
    result.check(mismatch == 0, "tangent and polar forms disagree on {} steps".format(mismatch))
    weight = model.m * model.g_grav
    tail = np.array([eta.p[0] for eta in traj.etas[-100:]])
    rest = float(np.max(np.abs(tail + weight)))
    result.check(rest <= 1e-9, "resting reaction off from -m g by {:.3e}".format(rest))
    result.details.update({"penetration": depth, "complementarity": power, "rest_reaction_error": rest})


def _oracle_cases(rng, count):
    """(label, model, law, state, stepper) cases for the likelihood oracle."""
    cases = [
        ("pure", HarmonicOscillator(1.0, 1.0), Pure(), lambda m, law, z, t, dt: step_pure(m, z, t, dt, law=law)),
        ("viscous", HarmonicOscillator(1.0, 1.0), Viscous(Quadratic(0.4)), step_viscous),
        ("plastic", ElastoPlastic1D(1.0, 1.0, f=Sinusoid(2.0, 0.5)), Plastic.from_yield_stress(1.0), step_plastic),
        ("damage", DamageModel(1.0, 1.0, 1.0, f=Constant(0.3)), Damage(0.5), step_damage),
        ("contact", ContactBall(0.3, 9.81), Contact(ConstraintSet([HalfSpace([1.0], 0.0)])), step_contact),
    ]
    for label, model, law, stepper in cases:
        for i in range(count):
            z = random_state(model, rng)
            if label == "plastic":
                # start on or inside the yield surface
                sigma = rng.choice([-1.0, 1.0, rng.uniform(-1.0, 1.0)])
                z = PhaseVector([z.q[0], z.q[0] - sigma / model.k], z.p)
            elif label == "contact" and i % 2:
                z = PhaseVector([0.0], [-abs(z.p[0])])
            yield "{} #{}".format(label, i), model, law, z, stepper


@suite("likelihood_oracle")
def likelihood_oracle_suite(result, rng, quick):
    count = 5 if quick else 20
    dt = 1e-2
    for label, model, law, z, stepper in _oracle_cases(rng, count):
        t = float(rng.uniform(0.0, 5.0))
        step = stepper(model, law, z, t, dt)
        found = brute_force_gap(law, step.z_state, step.z_dot, grid=_floor_grid(step.eta))
        result.check(within_argmin(step.eta, found), "{}: stepper gap {} not within one cell".format(label, step.eta))
        if step.residual <= ORACLE_RESIDUAL_TOL:
            result.check(found.I_star <= ORACLE_I_TOL, "{}: oracle minimum {:.3e}".format(label, found.I_star))


@suite("bipotential_equivalence")
def bipotential_equivalence_suite(result, rng, quick):
    runs = [
        ("damped_oscillator", {"T": 2.0 if quick else 10.0}),
        ("plastic_cycle", {"dt": 1e-3}),
        ("damage_growth", {"dt": 1e-2} if quick else {}),
    ]
    stride = 10 if quick else 1
    for name, overrides in runs:
        scenario = prepare_scenario(name, **overrides)
        model, law = scenario.model, scenario.law
        traj = scenario.integrate()
        discrepancies, probe_failures = 0, 0
        probed = set(rng.choice(traj.steps, min(10, traj.steps), replace=False).tolist())
        for k in range(0, traj.steps, stride):
            eta = traj.etas[k]
            sample = discrete_gap_sample(model, law, traj.states[k], traj.states[k + 1], traj.times[k], scenario.dt)
            zero = zero_gap_holds(law, sample.z, sample.z_dot, eta)
            inclusion = subgradient_inclusion_holds(law, sample.z, sample.z_dot, eta)
            discrepancies += zero != inclusion
        for k in sorted(probed):
            sample = discrete_gap_sample(model, law, traj.states[k], traj.states[k + 1], traj.times[k], scenario.dt)
            probe = bipotential_equivalence_check(law, sample.z, sample.z_dot, traj.etas[k], probes=50, rng=rng)
            probe_failures += probe["slot2_failures"] + probe["slot3_failures"]
        result.check(discrepancies == 0, "{}: {} steps where I = 0 and the inclusion disagree".format(name, discrepancies))
        result.check(probe_failures == 0, "{}: {} failed bipotential probes".format(name, probe_failures))
        result.details[name] = {"steps": traj.steps, "discrepancies": int(discrepancies)}


@suite("gradient_checks")
def gradient_checks_suite(result, rng, quick):
    points = 20 if quick else 100
    models = [
        HarmonicOscillator(1.3, 0.7),
        Pendulum(0.8, 9.81, 1.2),
        ElastoPlastic1D(1.0, 2.0, f=Sinusoid(1.0, 0.5)),
        DamageModel(1.0, 2.0, 1.5, f=Constant(0.3)),
        ContactBall(0.5, 9.81),
    ]
    for model in models:
        worst = 0.0
        for _ in range(points):
            z = random_state(model, rng)
            t = float(rng.uniform(0.0, 10.0))
            analytic = gradient(model, z, t)
            numeric = finite_difference_gradient(model, z, t)
            worst = max(worst, relative_error(analytic.flat(), numeric.flat()))
        result.check(worst <= DEFAULT_FD_RTOL, "{}: gradient relative error {:.3e}".format(model.tag, worst))
        result.details[model.tag] = worst


@suite("convergence")
def convergence_suite(result, rng, quick):
    dts = [0.04, 0.02, 0.01] if quick else [0.02, 0.01, 0.005]
    T = 1.0 if quick else 2.0
    oscillator = HarmonicOscillator(1.0, 1.0)
    z0 = PhaseVector([1.0], [0.0])
    for label, law in (("pure", Pure()), ("viscous", Viscous(Quadratic(0.2)))):
        frame = convergence_study(oscillator, law, z0, 0.0, T, dts)
        ratios = frame["ratio"].values[1:]
        lo, hi = CONVERGENCE_RATIO
        result.check(
            bool(np.all((ratios >= lo) & (ratios <= hi))), "{}: error ratios {} outside 2 +- 0.3".format(label, ratios)
        )
        result.details[label] = [float(r) for r in ratios]


@suite("axioms")
def axioms_suite(result, rng, quick):
    laws = [
        Pure(),
        Viscous(Quadratic(0.5)),
        Plastic.from_yield_stress(1.0),
        Damage(0.5),
        Contact(ConstraintSet([HalfSpace([1.0], 0.0)])),
        Separable(SeparableProduct([(Quadratic(1.0), (0,)), (Quadratic(2.0), (1,))])),
    ]
    seed = int(rng.integers(0, 2 ** 31 - 1))
    for law in laws:
        report = axioms_check(
            law, sample_count=200 if quick else 1000, seed=seed, infimum_samples=5 if quick else 20
        )
        result.check(report.ok, "{}: axioms report {}".format(law.tag, report.to_dict()))
        result.details[law.tag] = {
            "convexity_violations": report.convexity_violations,
            "infimum_violations": report.infimum_violations(),
        }


@suite("monotonicity")
def monotonicity_suite(result, rng, quick):
    points = 12 if quick else 20
    for name, f in shipped_specs().items():
        graph = [subgradient_pair(f, v) for v in rng.uniform(-3.0, 3.0, points)]
        result.check(cyclically_monotone_check(graph, max_n=3), "{}: subdifferential graph not 3-monotone".format(name))
    xs = np.linspace(-1.0, 1.0, points)
    result.check(not n_monotone_check([(x, -x) for x in xs], 1), "a decreasing graph passed the 1-monotone check")


def run_suites(names=None, quick=False, seed=SEED):
    """Run suites in registration order.

    Args:
        names (list): Suite names, all when None.
        quick (bool): Shorter runs and fewer samples.
        seed (int): Base seed; suite i uses seed + i.

    Returns:
        (list, dict): Suite results and wall-clock seconds per suite.

    Raises:
        ValueError: On an unknown suite name.
    """
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError("unknown suites {}, expected some of {}".format(unknown, list(SUITES)))
    results, timings = [], OrderedDict()
    for name in names:
        index = list(SUITES).index(name)
        result = SuiteResult(name)
        with Timer(name) as t:
            SUITES[name](result, np.random.default_rng(seed + index), quick)
        timings[name] = t.interval
        logger.info("suite %s: %d checks, %d failures", name, result.checks, len(result.failures))
        results.append(result)
    return results, timings
