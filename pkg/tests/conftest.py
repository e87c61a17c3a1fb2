# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

# NOTE: This file is used by pytest to inject fixtures automatically. As it is explained in the documentation
# https://docs.pytest.org/en/latest/fixture.html:
# "If during implementing your tests you realize that you want to use a fixture function from multiple test files
# you can move it to a conftest.py file. You don't need to import the module you defined your fixtures to use in a test,
# it automatically gets discovered by pytest and thus you can simply receive fixture objects by naming them as
# an input argument in the test."

from tempfile import TemporaryDirectory

import numpy as np
import pytest

from gapdyn.common.constants import SEED, SEED_ENV_VAR
from gapdyn.dynamics.dissipation import Contact, Damage, Plastic, Pure, Viscous
from gapdyn.dynamics.forcing import Constant, Sinusoid
from gapdyn.dynamics.models import (
    ContactBall,
    DamageModel,
    ElastoPlastic1D,
    HarmonicOscillator,
    Pendulum,
)
from gapdyn.geometry.convex import Quadratic


@pytest.fixture
def tmp(tmp_path_factory):
    with TemporaryDirectory(dir=tmp_path_factory.getbasetemp()) as td:
        yield td


@pytest.fixture(autouse=True)
def no_seed_override(monkeypatch):
    """Tests see the seed of their config, not one exported in the shell."""
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="module")
def oscillator():
    return HarmonicOscillator(m=1.0, k=1.0)


@pytest.fixture(scope="module")
def pendulum():
    return Pendulum(m=0.8, g=9.81, l=1.2)


@pytest.fixture(scope="module")
def elasto_plastic():
    return ElastoPlastic1D(m=1.0, k=1.0, f=Sinusoid(2.0, 0.5))


@pytest.fixture(scope="module")
def damage_model():
    return DamageModel(m=1.0, m_d=1.0, E0=1.0, f=Constant(0.3))


@pytest.fixture(scope="module")
def ball():
    return ContactBall(m=1.0, g_grav=9.81)


@pytest.fixture(scope="module")
def models(oscillator, pendulum, elasto_plastic, damage_model, ball):
    return [oscillator, pendulum, elasto_plastic, damage_model, ball]


@pytest.fixture(scope="module")
def laws(ball):
    return {
        "pure": Pure(),
        "viscous": Viscous(Quadratic(0.2)),
        "plastic": Plastic.from_yield_stress(1.0),
        "damage": Damage(0.5),
        "contact": Contact(ball.constraint),
    }
