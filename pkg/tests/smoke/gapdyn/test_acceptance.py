# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

import pytest

from gapdyn.evaluation.validation import SUITES, run_suites


@pytest.mark.smoke
@pytest.mark.parametrize("name", list(SUITES))
def test_suite_quick(name):
    results, _ = run_suites([name], quick=True)
    assert results[0].passed, results[0].failures


@pytest.mark.smoke
def test_contact_rest_reaction():
    results, _ = run_suites(["contact"])
    details = results[0].details
    assert details["penetration"] <= 1e-12
    assert details["rest_reaction_error"] <= 1e-9


@pytest.mark.smoke
@pytest.mark.parametrize("name", list(SUITES))
def test_suite_full(name):
    results, _ = run_suites([name], quick=False)
    assert results[0].passed, results[0].failures


@pytest.mark.smoke
def test_damage_saturates_within_threshold():
    results, _ = run_suites(["damage"])
    details = results[0].details
    assert results[0].passed, results[0].failures
    assert details["max_eta_r_excess"] <= 1e-9
    assert 0.0 < details["saturation_time"] < 3.0
