# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.


import time

import pytest

from gapdyn.common.timer import Timer


TOL = 0.03


@pytest.fixture(scope="function")
def t():
    return Timer()


def test_no_time(t):
    assert t.interval == 0
    assert t.running is False


def test_stop_before_start(t):
    with pytest.raises(ValueError, match="not been started"):
        t.stop()


def test_interval_before_stop(t):
    t.start()
    with pytest.raises(ValueError, match="not been stopped"):
        t.interval


def test_timer(t):
    t.start()
    assert t.running is True
    time.sleep(0.5)
    t.stop()
    assert t.running is False
    assert t.interval == pytest.approx(0.5, abs=TOL)
    with Timer("suite") as t2:
        assert t2.running is True
        time.sleep(0.5)
    assert t2.interval == pytest.approx(0.5, abs=TOL)
    assert t2.running is False


def test_timer_format(t):
    assert str(t) == "0.0000"
