# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

import copy
import logging
import math
import os

import yaml

from gapdyn.common.constants import (
    DEFAULT_FP_TOL,
    DEFAULT_MAX_ITER,
    DEFAULT_STEP_TOL,
    SEED,
    SEED_ENV_VAR,
)
from gapdyn.config.errors import ConfigError
from gapdyn.dynamics.dissipation import Contact, law_from_dict
from gapdyn.dynamics.integrators import integrate, scheme_name
from gapdyn.dynamics.models import REQUIRED_PARAMETERS, MODELS, model_from_dict
from gapdyn.geometry.phase_space import PhaseVector


logger = logging.getLogger(__name__)

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")

SECTIONS = ("model", "law", "initial_state", "integration", "contact", "output")

DEFAULTS = {
    "integration": {
        "t0": 0.0,
        "T": 10.0,
        "dt": 1e-3,
        "step_tolerance": DEFAULT_STEP_TOL,
        "max_iter": DEFAULT_MAX_ITER,
        "fp_tolerance": DEFAULT_FP_TOL,
    },
    "contact": {"restitution": 0.0},
    "output": {"directory": None},
}

# leaf keys accepted as keyword overrides, with their section
LEAF_SECTIONS = {
    "t0": "integration",
    "T": "integration",
    "dt": "integration",
    "step_tolerance": "integration",
    "max_iter": "integration",
    "fp_tolerance": "integration",
    "restitution": "contact",
    "directory": "output",
    "q": "initial_state",
    "p": "initial_state",
}


def scenario_path(name):
    """Resolve a file path or the bare name of a shipped scenario.

    Raises:
        ConfigError: If neither exists.
    """
    if os.path.isfile(name):
        return name
    candidate = os.path.join(SCENARIO_DIR, name if name.endswith(".yaml") else name + ".yaml")
    if os.path.isfile(candidate):
        return candidate
    raise ConfigError(
        "no scenario file {!r}; shipped scenarios are {}".format(name, list_scenarios()), field="config"
    )


def list_scenarios():
    return sorted(os.path.splitext(f)[0] for f in os.listdir(SCENARIO_DIR) if f.endswith(".yaml"))


def load_yaml(filename):
    """Load a yaml file.

    Args:
        filename (str): Filename.

    Returns:
        dict: Dictionary.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: If the file is not a YAML mapping.
    """
    try:
        with open(filename, "r") as f:
            config = yaml.load(f, yaml.SafeLoader)
    except FileNotFoundError:
        raise
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = " at line {}, column {}".format(mark.line + 1, mark.column + 1) if mark else ""
        raise ConfigError("cannot parse {}{}: {}".format(filename, where, getattr(e, "problem", e)))
    if not isinstance(config, dict):
        raise ConfigError("{} must contain a mapping of sections".format(filename))
    return config


def flat_config(config):
    """Flat view of the sectioned config, keyed by leaf name.

    Args:
        config (dict): Configuration loaded from a yaml file.

    Returns:
        dict: Leaf name to (section, value).
    """
    f_config = {}
    for section in ("initial_state", "integration", "contact", "output"):
        for key, val in (config.get(section) or {}).items():
            f_config[key] = (section, val)
    return f_config


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def check_type(config):
    """Check that the config parameters are the correct type.

    Float-like strings, e.g. ``1e-4`` which YAML 1.1 reads as text, are converted in place.

    Args:
        config (dict): Sectioned configuration.

    Raises:
        ConfigError: If a parameter has the wrong type; the message names the field.
    """
    float_parameters = ["t0", "T", "dt", "step_tolerance", "fp_tolerance", "restitution"]
    for param, (section, value) in flat_config(config).items():
        field = "{}.{}".format(section, param)
        if param in float_parameters:
            if isinstance(value, str):
                try:
                    value = float(value)
                except ValueError:
                    raise ConfigError("must be a number, got {!r}".format(value), field=field)
                config[section][param] = value
            if not _is_number(value) or math.isnan(value):
                raise ConfigError("must be a number, got {!r}".format(value), field=field)
        elif param == "max_iter":
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError("must be an integer, got {!r}".format(value), field=field)
        elif param in ("q", "p"):
            if _is_number(value):
                config[section][param] = value = [value]
            if not isinstance(value, list) or not all(_is_number(v) for v in value):
                raise ConfigError("must be a list of numbers, got {!r}".format(value), field=field)
        elif param == "directory":
            if value is not None and not isinstance(value, str):
                raise ConfigError("must be a path, got {!r}".format(value), field=field)
    if "seed" in config and (not isinstance(config["seed"], int) or isinstance(config["seed"], bool)):
        raise ConfigError("must be an integer, got {!r}".format(config["seed"]), field="seed")


def check_config(config):
    """Check that the config parameters are reasonable.

    Args:
        config (dict): Sectioned configuration, types already checked.

    Returns:
        (HamiltonianModel, DissipationLaw): The model and law the config describes.

    Raises:
        ConfigError: On the first problem found.
    """
    for section in ("model", "law", "initial_state"):
        if not isinstance(config.get(section), dict):
            raise ConfigError("section must be set", field=section)

    model_cfg = config["model"]
    kind = model_cfg.get("type")
    if kind not in MODELS:
        raise ConfigError("unknown model {!r}, expected one of {}".format(kind, sorted(MODELS)), field="model.type")
    for param in REQUIRED_PARAMETERS[kind]:
        if param not in model_cfg:
            raise ConfigError("must be set for {}".format(kind), field="model.{}".format(param))
    try:
        model = model_from_dict(model_cfg)
    except ValueError as e:
        raise ConfigError(str(e), field="model")

    law_cfg = dict(config["law"])
    if law_cfg.get("type") == Contact.tag and "restitution" not in law_cfg:
        law_cfg["restitution"] = config["contact"]["restitution"]
    try:
        law = law_from_dict(law_cfg, model)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e), field="law")
    try:
        law.check_model(model)
        scheme_name(law)
    except TypeError as e:
        raise ConfigError(str(e), field="law.type")

    state = config["initial_state"]
    for key in ("q", "p"):
        if key not in state:
            raise ConfigError("must be set", field="initial_state.{}".format(key))
        if len(state[key]) != model.dim:
            raise ConfigError(
                "has {} entries but {} needs {}".format(len(state[key]), kind, model.dim),
                field="initial_state.{}".format(key),
            )

    integration = config["integration"]
    if not integration["dt"] > 0:
        raise ConfigError("must be > 0, got {}".format(integration["dt"]), field="integration.dt")
    if not integration["T"] >= integration["t0"]:
        raise ConfigError(
            "must be >= t0 = {}, got {}".format(integration["t0"], integration["T"]), field="integration.T"
        )
    for param in ("step_tolerance", "fp_tolerance"):
        if not integration[param] > 0:
            raise ConfigError("must be > 0, got {}".format(integration[param]), field="integration." + param)
    if integration["max_iter"] < 1:
        raise ConfigError("must be >= 1", field="integration.max_iter")
    restitution = config["contact"]["restitution"]
    if not 0.0 <= restitution <= 1.0:
        raise ConfigError("must lie in [0, 1], got {}".format(restitution), field="contact.restitution")
    return model, law


class ScenarioConfig(object):
    """A resolved scenario: model, law, initial state and integration settings.

    Build it with :func:`prepare_scenario`.
    """

    def __init__(self, name, config, model, law, seed, seed_source):
        integration = config["integration"]
        self.name = name
        self.model = model
        self.law = law
        self.z0 = PhaseVector(config["initial_state"]["q"], config["initial_state"]["p"])
        self.t0 = float(integration["t0"])
        self.T = float(integration["T"])
        self.dt = float(integration["dt"])
        self.step_tolerance = float(integration["step_tolerance"])
        self.max_iter = int(integration["max_iter"])
        self.fp_tolerance = float(integration["fp_tolerance"])
        self.restitution = law.restitution if isinstance(law, Contact) else None
        self.output_directory = config["output"]["directory"]
        self.seed = seed
        self.seed_source = seed_source
        self.scheme = scheme_name(law)
        self._config = config

    def integrate(self, progress=False):
        """Run the scenario.

        Returns:
            Trajectory: The run.
        """
        return integrate(
            self.model,
            self.law,
            self.z0,
            self.t0,
            self.T,
            self.dt,
            step_tolerance=self.step_tolerance,
            max_iter=self.max_iter,
            fp_tol=self.fp_tolerance,
            progress=progress,
        )

    def tolerances(self):
        return {
            "step_tolerance": self.step_tolerance,
            "fp_tolerance": self.fp_tolerance,
            "max_iter": self.max_iter,
            "feasibility_tolerance": self.law.feasibility_tol,
        }

    def to_dict(self):
        """Resolved config with canonical model and law forms, enough to rerun the scenario."""
        resolved = copy.deepcopy(self._config)
        resolved["name"] = self.name
        resolved["model"] = self.model.to_dict()
        resolved["law"] = self.law.to_dict()
        resolved["seed"] = self.seed
        return resolved

    def __repr__(self):
        return "ScenarioConfig(name={!r}, model={}, law={}, dt={}, T={})".format(
            self.name, self.model.tag, self.law.tag, self.dt, self.T
        )


def _apply_overrides(config, overrides):
    for name, value in overrides.items():
        if name in SECTIONS:
            if isinstance(value, dict) and isinstance(config.get(name), dict) and name not in ("model", "law"):
                config[name].update(value)
            else:
                config[name] = copy.deepcopy(value)
        elif name in ("seed", "name"):
            config[name] = value
        elif name in LEAF_SECTIONS:
            config.setdefault(LEAF_SECTIONS[name], {})[name] = value
        else:
            raise ConfigError("unknown override", field=name)


def resolve_seed(config=None):
    """Seed and its source: the GAPDYN_SEED variable, the config, or the default."""
    config = config or {}
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env), "env"
        except ValueError:
            raise ConfigError("must be an integer, got {!r}".format(env), field=SEED_ENV_VAR)
    if "seed" in config:
        return config["seed"], "config"
    return SEED, "default"


def prepare_scenario(yaml_file=None, **overrides):
    """Load a scenario file, apply overrides and check every value.

    Args:
        yaml_file (str): Scenario file, or the bare name of a shipped scenario.
        overrides: Whole sections (``integration={"T": 1.0}``) or leaf keys (``T=1.0``).

    Returns:
        ScenarioConfig: The resolved scenario.

    Raises:
        ConfigError: On any configuration problem.
        FileNotFoundError: If yaml_file names a missing path.
    """
    config = copy.deepcopy(DEFAULTS)
    name = "scenario"
    if yaml_file is not None:
        path = scenario_path(yaml_file)
        loaded = load_yaml(path)
        unknown = sorted(set(loaded) - set(SECTIONS) - {"seed", "name"})
        if unknown:
            raise ConfigError("unknown sections {}".format(unknown), field=path)
        for section, value in loaded.items():
            if section in DEFAULTS and isinstance(value, dict):
                config[section].update(value)
            else:
                config[section] = value
        name = os.path.splitext(os.path.basename(path))[0]
    _apply_overrides(config, overrides)
    name = config.pop("name", name)

    check_type(config)
    model, law = check_config(config)
    seed, seed_source = resolve_seed(config)
    config["seed"] = seed
    logger.info("scenario %s: %s under %s, seed %d from %s", name, model.tag, law.tag, seed, seed_source)
    return ScenarioConfig(name, config, model, law, seed, seed_source)
