# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

# Command line entry point.
# Run shipped or custom scenarios and write their outputs:
# $ gapdyn run --config damped_oscillator --out runs
# $ gapdyn run --config plastic_cycle bouncing_ball --out runs --jobs 2
# Run the verification suites:
# $ gapdyn validate --json validation.json --quick
# Compare a numeric conjugate with the closed-form polar:
# $ gapdyn conjugate --spec "{type: quadratic, a: 0.2}" --range -5 5 --samples 2001 --out conj.csv

import argparse
import json
import logging
import os
import sys

import yaml
from joblib import Parallel, delayed

from gapdyn import __version__
from gapdyn.common.constants import (
    AUDIT_FILE,
    CSV_FLOAT_FORMAT,
    DEFAULT_CONJUGATE_GRID,
    DEFAULT_CONJUGATE_SAMPLES,
    HYSTERESIS_FILE,
    LEDGER_FILE,
    METADATA_FILE,
    SCHEMA_VERSION,
    TRAJECTORY_FILE,
)
from gapdyn.common.timer import Timer
from gapdyn.config.errors import ConfigError
from gapdyn.config.scenario import load_yaml, prepare_scenario, resolve_seed
from gapdyn.dynamics.integrators import StepError
from gapdyn.dynamics.models import ElastoPlastic1D
from gapdyn.evaluation.diagnostics import energy_audit, hysteresis_loop
from gapdyn.evaluation.validation import run_suites
from gapdyn.geometry.convex import conjugate_comparison, convex_spec_from_dict


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_STEP = 3

LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"
DEFAULT_OUT_DIR = "runs"


def _write_csv(frame, path):
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)


def _write_json(data, path):
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def run_scenario(config_path, out_dir=None, progress=False):
    """Integrate one scenario and write its outputs to out_dir/<scenario name>.

    Files written: trajectory.csv, ledger.csv, audit.json, metadata.json, and
    hysteresis.csv for elasto-plastic runs. A failed step still writes the
    partial trajectory with its audit.

    Args:
        config_path (str): Scenario file or shipped scenario name.
        out_dir (str): Output root; the scenario's output.directory when None.
        progress (bool): Show a progress bar.

    Returns:
        int: 0 clean run, 1 invariant violations, 2 configuration error, 3 step failure.
    """
    try:
        scenario = prepare_scenario(config_path)
    except (ConfigError, FileNotFoundError, ValueError) as e:
        logger.error("%s: %s", config_path, e)
        return EXIT_CONFIG

    root = out_dir or scenario.output_directory or DEFAULT_OUT_DIR
    directory = os.path.join(root, scenario.name)
    os.makedirs(directory, exist_ok=True)

    failure = None
    with Timer(scenario.name) as t:
        try:
            trajectory = scenario.integrate(progress=progress)
        except StepError as e:
            logger.error("%s: %s", scenario.name, e)
            failure = e
            trajectory = e.partial
        except ValueError as e:
            # inadmissible initial state
            logger.error("%s: %s", scenario.name, e)
            return EXIT_CONFIG

    metadata = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "scenario": scenario.name,
        "scheme": scenario.scheme,
        "restitution": scenario.restitution,
        "tolerances": scenario.tolerances(),
        "seed": scenario.seed,
        "seed_source": scenario.seed_source,
        "elapsed_seconds": t.interval,
        "resolved_config": scenario.to_dict(),
    }
    if failure is not None:
        metadata["step_error"] = {
            "message": str(failure),
            "step_index": failure.step_index,
            "diagnostics": failure.diagnostics,
        }

    if trajectory is None or len(trajectory) == 0:
        _write_json(metadata, os.path.join(directory, METADATA_FILE))
        return EXIT_STEP

    _write_csv(trajectory.to_frame(), os.path.join(directory, TRAJECTORY_FILE))
    audit = energy_audit(trajectory, scenario.model, scenario.law, step_tolerance=scenario.step_tolerance)
    _write_csv(audit.energy_ledger, os.path.join(directory, LEDGER_FILE))
    if isinstance(scenario.model, ElastoPlastic1D):
        _write_csv(hysteresis_loop(trajectory, scenario.model), os.path.join(directory, HYSTERESIS_FILE))
    audit.to_json(os.path.join(directory, AUDIT_FILE))
    _write_json(metadata, os.path.join(directory, METADATA_FILE))

    if failure is not None:
        return EXIT_STEP
    if not audit.ok:
        logger.warning("%s: violated %s", scenario.name, ", ".join(audit.invariants()))
        return EXIT_VIOLATION
    logger.info(
        "%s: %d steps in %.2f s, gap functional %.3e", scenario.name, trajectory.steps, t.interval,
        audit.gap_functional_value,
    )
    return EXIT_OK


def run(config_paths, out_dir=None, jobs=1, progress=False):
    """Run several scenarios, in parallel when jobs > 1.

    Returns:
        int: The largest exit code of the runs.
    """
    if jobs == 1:
        codes = [run_scenario(path, out_dir, progress) for path in config_paths]
    else:
        codes = Parallel(n_jobs=jobs)(delayed(run_scenario)(path, out_dir, False) for path in config_paths)
    return max(codes) if codes else EXIT_OK


def validate(json_path=None, suites=None, quick=False):
    """Run the verification suites and print a summary.

    Returns:
        int: 0 when every suite passes, 1 on a failure, 2 on an unknown suite.
    """
    try:
        seed, seed_source = resolve_seed()
        results, timings = run_suites(suites, quick=quick, seed=seed)
    except (ConfigError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG

    width = max(len(r.name) for r in results)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print("{:<{w}}  {}  {:4d} checks  {:8.2f} s".format(result.name, status, result.checks, timings[result.name], w=width))
        for message in result.failures:
            print("    - {}".format(message))
    passed = all(r.passed for r in results)
    print("{} of {} suites passed".format(sum(r.passed for r in results), len(results)))

    if json_path is not None:
        report = {
            "schema_version": SCHEMA_VERSION,
            "package_version": __version__,
            "seed": seed,
            "seed_source": seed_source,
            "quick": quick,
            "passed": passed,
            "suites": {r.name: r.to_dict() for r in results},
            "timings": dict(timings),
        }
        _write_json(report, json_path)
    return EXIT_OK if passed else EXIT_VIOLATION


def _parse_spec(text):
    if os.path.isfile(text):
        return load_yaml(text)
    try:
        spec = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError("cannot parse spec: {}".format(e), field="spec")
    if not isinstance(spec, dict):
        raise ConfigError("spec must be a mapping or a file, got {!r}".format(text), field="spec")
    return spec


def conjugate_table(spec, lo=DEFAULT_CONJUGATE_GRID[0], hi=DEFAULT_CONJUGATE_GRID[1],
                    samples=DEFAULT_CONJUGATE_SAMPLES, out_path="conjugate.csv"):
    """Write the numeric against closed-form conjugate table of a 1-D spec.

    Args:
        spec (str): Inline YAML mapping or a file holding one.
        lo (float): Grid start.
        hi (float): Grid end.
        samples (int): Grid points.
        out_path (str): CSV destination.

    Returns:
        int: 0 on success, 2 when the spec is unreadable, not 1-D or has no
        closed-form polar (the numeric table is still written then).
    """
    try:
        f = convex_spec_from_dict(_parse_spec(spec))
        if f.dim != 1:
            raise ConfigError("conjugate tables need a 1-D function, got dim {}".format(f.dim), field="spec")
        table = conjugate_comparison(f, lo, hi, samples)
    except (ConfigError, FileNotFoundError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    _write_csv(table, out_path)
    if table["phi_star_closed_form"].isna().all():
        logger.error("%s has no closed-form polar; wrote the numeric column only", f.tag)
        return EXIT_CONFIG
    logger.info("max |numeric - closed form| = %.3e", table["abs_diff"].max())
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gapdyn", description="Dissipative Hamiltonian simulation with gap-functional diagnostics."
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging.")
    commands = parser.add_subparsers(dest="command")
    commands.required = True

    run_parser = commands.add_parser("run", help="Integrate scenarios and audit them.")
    run_parser.add_argument("--config", nargs="+", required=True, help="Scenario files or shipped names.")
    run_parser.add_argument("--out", default=None, help="Output root directory.")
    run_parser.add_argument("--jobs", type=int, default=1, help="Scenarios run in parallel.")
    run_parser.add_argument("--progress", action="store_true", help="Show a progress bar.")

    validate_parser = commands.add_parser("validate", help="Run the verification suites.")
    validate_parser.add_argument("--json", default=None, help="Write the report to this file.")
    validate_parser.add_argument("--suite", nargs="+", default=None, help="Suites to run, all by default.")
    validate_parser.add_argument("--quick", action="store_true", help="Shorter runs, fewer samples.")

    conj_parser = commands.add_parser("conjugate", help="Numeric against closed-form conjugate table.")
    conj_parser.add_argument("--spec", required=True, help="Inline YAML mapping or a file.")
    conj_parser.add_argument("--range", nargs=2, type=float, default=list(DEFAULT_CONJUGATE_GRID),
                             metavar=("LO", "HI"))
    conj_parser.add_argument("--samples", type=int, default=DEFAULT_CONJUGATE_SAMPLES)
    conj_parser.add_argument("--out", required=True, help="CSV destination.")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)

    if args.command == "run":
        return run(args.config, args.out, args.jobs, args.progress)
    if args.command == "validate":
        return validate(args.json, args.suite, args.quick)
    return conjugate_table(args.spec, args.range[0], args.range[1], args.samples, args.out)


if __name__ == "__main__":
    sys.exit(main())
