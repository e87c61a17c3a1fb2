# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

import json
import os

import pandas as pd
import pytest
import yaml

from gapdyn import __version__
from gapdyn.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, build_parser, main
from gapdyn.config.scenario import list_scenarios, load_yaml, scenario_path
from gapdyn.geometry.convex import Linear


def short_config(directory, name, **integration):
    """Copy of a shipped scenario with a shorter horizon."""
    config = load_yaml(scenario_path(name))
    config["integration"].update(integration or {"T": 0.5})
    path = os.path.join(directory, name + ".yaml")
    with open(path, "w") as f:
        yaml.safe_dump(config, f)
    return path


def read_json(path):
    with open(path) as f:
        return json.load(f)


@pytest.mark.integration
@pytest.mark.parametrize("name", list_scenarios())
def test_run_writes_outputs(tmp, name):
    config = short_config(tmp, name)
    out = os.path.join(tmp, "runs")
    assert main(["run", "--config", config, "--out", out]) == EXIT_OK

    directory = os.path.join(out, name)
    trajectory = pd.read_csv(os.path.join(directory, "trajectory.csv"))
    assert trajectory["t"].iloc[-1] == pytest.approx(0.5)
    ledger = pd.read_csv(os.path.join(directory, "ledger.csv"))
    assert len(ledger) == len(trajectory) - 1
    audit = read_json(os.path.join(directory, "audit.json"))
    assert audit["violations"] == []

    metadata = read_json(os.path.join(directory, "metadata.json"))
    assert metadata["scenario"] == name
    assert metadata["package_version"] == __version__
    assert metadata["seed"] == 42
    assert metadata["seed_source"] == "config"
    assert metadata["resolved_config"]["integration"]["T"] == 0.5
    assert os.path.isfile(os.path.join(directory, "hysteresis.csv")) == (name == "plastic_cycle")


@pytest.mark.integration
def test_run_several_jobs(tmp):
    configs = [short_config(tmp, name, T=0.2) for name in ("pure_oscillator", "damped_oscillator")]
    out = os.path.join(tmp, "runs")
    assert main(["run", "--config"] + configs + ["--out", out, "--jobs", "2"]) == EXIT_OK
    assert sorted(os.listdir(out)) == ["damped_oscillator", "pure_oscillator"]


@pytest.mark.integration
def test_run_restitution(tmp):
    config = load_yaml(scenario_path("bouncing_ball"))
    config["integration"]["T"] = 0.6
    config["contact"]["restitution"] = 0.5
    path = os.path.join(tmp, "bounce.yaml")
    with open(path, "w") as f:
        yaml.safe_dump(config, f)
    assert main(["run", "--config", path, "--out", tmp]) == EXIT_OK
    metadata = read_json(os.path.join(tmp, "bounce", "metadata.json"))
    assert metadata["restitution"] == 0.5
    assert metadata["scheme"] == "moreau_contact"


@pytest.mark.integration
def test_run_config_error(tmp):
    path = short_config(tmp, "pure_oscillator", dt=0.0)
    assert main(["run", "--config", path, "--out", tmp]) == EXIT_CONFIG
    assert not os.path.exists(os.path.join(tmp, "pure_oscillator"))
    assert main(["run", "--config", "no_such_scenario", "--out", tmp]) == EXIT_CONFIG


@pytest.mark.integration
def test_run_seed_from_env(tmp, monkeypatch):
    monkeypatch.setenv("GAPDYN_SEED", "11")
    path = short_config(tmp, "pure_oscillator", T=0.1)
    assert main(["run", "--config", path, "--out", tmp]) == EXIT_OK
    metadata = read_json(os.path.join(tmp, "pure_oscillator", "metadata.json"))
    assert (metadata["seed"], metadata["seed_source"]) == (11, "env")


@pytest.mark.integration
def test_conjugate_quadratic(tmp):
    out = os.path.join(tmp, "conj.csv")
    code = main(["conjugate", "--spec", "{type: quadratic, a: 2.0}", "--range", "-4", "4", "--samples", "801",
                 "--out", out])
    assert code == EXIT_OK
    table = pd.read_csv(out)
    assert list(table.columns[:3]) == ["y", "phi_star_numeric", "phi_star_closed_form"]
    assert len(table) == 801
    assert table["abs_diff"].max() <= 0.05


@pytest.mark.integration
def test_conjugate_errors(tmp):
    out = os.path.join(tmp, "conj.csv")
    spec = "{type: sum, terms: [{type: quadratic, a: 1.0}, {type: indicator_box, lo: [-1.0], hi: [1.0]}]}"
    assert main(["conjugate", "--spec", spec, "--out", out]) == EXIT_CONFIG
    assert os.path.isfile(out)
    assert pd.read_csv(out)["phi_star_closed_form"].isna().all()

    flat = "{type: quadratic, a: 1.0, center: [0.0, 0.0]}"
    assert main(["conjugate", "--spec", flat, "--out", os.path.join(tmp, "2d.csv")]) == EXIT_CONFIG
    assert main(["conjugate", "--spec", "not a mapping", "--out", out]) == EXIT_CONFIG


@pytest.mark.integration
def test_conjugate_spec_file(tmp):
    path = os.path.join(tmp, "spec.yaml")
    with open(path, "w") as f:
        yaml.safe_dump({"type": "linear", "slope": [0.7]}, f)
    assert main(["conjugate", "--spec", path, "--out", os.path.join(tmp, "conj.csv")]) == EXIT_OK


@pytest.mark.integration
def test_validate_json(tmp):
    path = os.path.join(tmp, "validation.json")
    assert main(["validate", "--suite", "fenchel", "monotonicity", "--quick", "--json", path]) == EXIT_OK
    report = read_json(path)
    assert report["passed"] is True
    assert report["quick"] is True
    assert report["seed_source"] == "default"
    assert sorted(report["suites"]) == ["fenchel", "monotonicity"]
    assert set(report["timings"]) == {"fenchel", "monotonicity"}
    assert report["suites"]["fenchel"]["checks"] > 0


@pytest.mark.integration
def test_validate_unknown_suite():
    assert main(["validate", "--suite", "no_such_suite"]) == EXIT_CONFIG


@pytest.mark.integration
def test_validate_catches_wrong_polar(monkeypatch, capsys):
    # a wrong polar for linear functions gives negative Fenchel gaps
    monkeypatch.setattr(Linear, "polar", lambda self: Linear(0.0, dim=self.dim))
    assert main(["validate", "--suite", "fenchel", "--quick"]) == EXIT_VIOLATION
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.integration
def test_parser():
    parser = build_parser()
    args = parser.parse_args(["run", "--config", "a.yaml", "b.yaml", "--jobs", "3"])
    assert args.config == ["a.yaml", "b.yaml"]
    assert args.jobs == 3
    with pytest.raises(SystemExit):
        parser.parse_args(["conjugate", "--spec", "{type: linear}"])
