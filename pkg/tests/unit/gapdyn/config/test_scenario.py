# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.


import os

import pytest
import yaml

from gapdyn.common.constants import SEED, SEED_ENV_VAR
from gapdyn.config.errors import ConfigError
from gapdyn.config.scenario import (
    check_type,
    flat_config,
    list_scenarios,
    load_yaml,
    prepare_scenario,
    resolve_seed,
    scenario_path,
)
from gapdyn.dynamics.dissipation import Contact, Plastic
from gapdyn.geometry.phase_space import PhaseVector


SHIPPED = {
    "bouncing_ball": "moreau_contact",
    "damage_growth": "damage_complementarity",
    "damped_oscillator": "viscous_prox",
    "plastic_cycle": "return_mapping",
    "pure_oscillator": "symplectic_euler",
}


def write_yaml(directory, name, config):
    path = os.path.join(directory, name)
    with open(path, "w") as f:
        if isinstance(config, str):
            f.write(config)
        else:
            yaml.safe_dump(config, f)
    return path


@pytest.fixture
def oscillator_config():
    return {
        "model": {"type": "harmonic_oscillator", "m": 1.0, "k": 1.0},
        "law": {"type": "viscous", "c": 0.2},
        "initial_state": {"q": [1.0], "p": [0.0]},
        "integration": {"T": 1.0, "dt": 0.01},
    }


def test_list_scenarios():
    assert list_scenarios() == sorted(SHIPPED)


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_shipped_scenarios(name):
    scenario = prepare_scenario(name)
    assert scenario.name == name
    assert scenario.scheme == SHIPPED[name]
    assert scenario.seed == 42
    assert scenario.seed_source == "config"
    assert scenario.z0.dim == scenario.model.dim
    assert scenario.dt > 0
    assert scenario_path(name).endswith(name + ".yaml")


def test_scenario_path_unknown():
    with pytest.raises(ConfigError, match="no scenario file") as e:
        scenario_path("no_such_scenario")
    assert e.value.field == "config"


def test_leaf_overrides():
    scenario = prepare_scenario("damped_oscillator", T=1.0, dt=0.01, q=[0.5], name="short")
    assert scenario.T == 1.0
    assert scenario.dt == 0.01
    assert scenario.z0 == PhaseVector([0.5], [0.0])
    assert scenario.name == "short"
    trajectory = scenario.integrate()
    assert trajectory.steps == 100
    assert trajectory.scheme == "viscous_prox"


def test_section_overrides():
    scenario = prepare_scenario("damped_oscillator", integration={"T": 2.0})
    assert scenario.T == 2.0
    assert scenario.dt == 1e-4
    plastic = prepare_scenario(
        "plastic_cycle", law={"type": "plastic", "phi": {"type": "indicator_box", "lo": [-2.0], "hi": [2.0]}}
    )
    assert isinstance(plastic.law, Plastic)
    assert plastic.law.yield_box.hi.tolist() == [2.0]


def test_restitution():
    scenario = prepare_scenario("bouncing_ball", restitution=0.5)
    assert isinstance(scenario.law, Contact)
    assert scenario.law.restitution == 0.5
    assert scenario.restitution == 0.5
    assert prepare_scenario("damped_oscillator").restitution is None


def test_tolerances():
    scenario = prepare_scenario("plastic_cycle")
    assert scenario.tolerances() == {
        "step_tolerance": 1e-8,
        "fp_tolerance": 1e-12,
        "max_iter": 100,
        "feasibility_tolerance": scenario.law.feasibility_tol,
    }


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"dt": 0.0}, "integration.dt"),
        ({"dt": "fast"}, "integration.dt"),
        ({"T": -1.0}, "integration.T"),
        ({"max_iter": 0}, "integration.max_iter"),
        ({"max_iter": 1.5}, "integration.max_iter"),
        ({"step_tolerance": 0.0}, "integration.step_tolerance"),
        ({"q": [1.0, 0.0]}, "initial_state.q"),
        ({"p": ["a"]}, "initial_state.p"),
        ({"restitution": 1.5}, "contact.restitution"),
        ({"directory": 3}, "output.directory"),
        ({"seed": "abc"}, "seed"),
        ({"speed": 1.0}, "speed"),
        ({"model": {"type": "harmonic_oscillator", "m": 1.0}}, "model.k"),
        ({"model": {"type": "rocket"}}, "model.type"),
        ({"model": {"type": "harmonic_oscillator", "m": -1.0, "k": 1.0}}, "model"),
        ({"law": {"type": "plastic", "yield_stress": 1.0}}, "law.type"),
        ({"law": {"type": "viscous"}}, "law"),
        ({"initial_state": None}, "initial_state"),
    ],
)
def test_config_errors(overrides, field):
    with pytest.raises(ConfigError) as e:
        prepare_scenario("damped_oscillator", **overrides)
    assert e.value.field == field
    assert str(e.value).startswith(field + ": ")


def test_float_strings(tmp, oscillator_config):
    # YAML 1.1 reads 1e-4 as a string
    path = write_yaml(tmp, "strings.yaml", "dt: 1e-4\n")
    assert load_yaml(path) == {"dt": "1e-4"}

    oscillator_config["integration"]["dt"] = "1e-4"
    scenario = prepare_scenario(write_yaml(tmp, "osc.yaml", oscillator_config))
    assert scenario.dt == 1e-4
    assert scenario.name == "osc"


def test_check_type_in_place():
    config = {"integration": {"T": "2.5", "max_iter": 10}, "initial_state": {"q": 1.0, "p": [0.0]}}
    check_type(config)
    assert config["integration"]["T"] == 2.5
    assert config["initial_state"]["q"] == [1.0]
    assert flat_config(config)["T"] == ("integration", 2.5)


def test_unknown_section(tmp, oscillator_config):
    oscillator_config["solver"] = {"kind": "rk4"}
    with pytest.raises(ConfigError, match="unknown sections"):
        prepare_scenario(write_yaml(tmp, "bad.yaml", oscillator_config))


def test_bad_yaml(tmp):
    with pytest.raises(ConfigError, match="cannot parse"):
        load_yaml(write_yaml(tmp, "broken.yaml", "model: [unclosed\n"))
    with pytest.raises(ConfigError, match="mapping"):
        load_yaml(write_yaml(tmp, "list.yaml", "- a\n- b\n"))
    with pytest.raises(FileNotFoundError):
        load_yaml(os.path.join(tmp, "missing.yaml"))


def test_seed_sources(monkeypatch, oscillator_config):
    scenario = prepare_scenario(None, **oscillator_config)
    assert (scenario.seed, scenario.seed_source) == (SEED, "default")
    assert scenario.name == "scenario"
    assert resolve_seed({"seed": 5}) == (5, "config")

    monkeypatch.setenv(SEED_ENV_VAR, "7")
    scenario = prepare_scenario("pure_oscillator")
    assert (scenario.seed, scenario.seed_source) == (7, "env")
    assert scenario.to_dict()["seed"] == 7

    monkeypatch.setenv(SEED_ENV_VAR, "seven")
    with pytest.raises(ConfigError) as e:
        resolve_seed()
    assert e.value.field == SEED_ENV_VAR


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_resolved_config_reloads(tmp, name):
    scenario = prepare_scenario(name, T=0.5)
    path = write_yaml(tmp, "resolved.yaml", scenario.to_dict())
    reloaded = prepare_scenario(path)
    assert reloaded.name == name
    assert reloaded.model == scenario.model
    assert reloaded.law.to_dict() == scenario.law.to_dict()
    assert reloaded.z0 == scenario.z0
    assert (reloaded.t0, reloaded.T, reloaded.dt) == (scenario.t0, scenario.T, scenario.dt)
    assert reloaded.seed == scenario.seed
