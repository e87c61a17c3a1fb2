# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

"""External loads f(t), entering the hamiltonians as -<q, f(t)>."""

import numpy as np


class ForcingFunction(object):
    tag = None

    def __call__(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def __eq__(self, other):
        if not isinstance(other, ForcingFunction):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self))

    def __repr__(self):
        return "{}({})".format(type(self).__name__, self.to_dict())


class Zero(ForcingFunction):
    tag = "zero"

    def __call__(self, t):
        return 0.0

    def derivative(self, t):
        return 0.0

    def to_dict(self):
        return {"type": self.tag}


class Constant(ForcingFunction):
    tag = "constant"

    def __init__(self, value):
        self.value = float(value)

    def __call__(self, t):
        return self.value

    def derivative(self, t):
        return 0.0

    def to_dict(self):
        return {"type": self.tag, "value": self.value}


class Sinusoid(ForcingFunction):
    """amplitude * sin(angular_frequency * t + phase)."""

    tag = "sinusoid"

    def __init__(self, amplitude, angular_frequency, phase=0.0):
        self.amplitude = float(amplitude)
        self.angular_frequency = float(angular_frequency)
        self.phase = float(phase)

    def __call__(self, t):
        return self.amplitude * np.sin(self.angular_frequency * t + self.phase)

    def derivative(self, t):
        return self.amplitude * self.angular_frequency * np.cos(self.angular_frequency * t + self.phase)

    def to_dict(self):
        return {
            "type": self.tag,
            "amplitude": self.amplitude,
            "angular_frequency": self.angular_frequency,
            "phase": self.phase,
        }


class PiecewiseLinear(ForcingFunction):
    """Linear interpolation between (t, value) knots, constant outside them.

    The derivative is the right derivative, zero outside the knot range.
    """

    tag = "piecewise_linear"

    def __init__(self, knots):
        knots = sorted((float(t), float(v)) for t, v in knots)
        if not knots:
            raise ValueError("PiecewiseLinear needs at least one knot")
        times = np.array([t for t, _ in knots])
        if np.any(np.diff(times) <= 0):
            raise ValueError("knot times must be distinct")
        self.times = times
        self.values = np.array([v for _, v in knots])

    def __call__(self, t):
        return float(np.interp(t, self.times, self.values))

    def derivative(self, t):
        if self.times.size < 2 or t < self.times[0] or t >= self.times[-1]:
            return 0.0
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return float((self.values[k + 1] - self.values[k]) / (self.times[k + 1] - self.times[k]))

    def to_dict(self):
        return {"type": self.tag, "knots": [[t, v] for t, v in zip(self.times.tolist(), self.values.tolist())]}


FORCINGS = {cls.tag: cls for cls in (Zero, Constant, Sinusoid, PiecewiseLinear)}


def forcing_from_dict(d):
    """Build a forcing function from its mapping form; None and 0 mean Zero."""
    if d is None or d == 0:
        return Zero()
    if isinstance(d, (int, float)):
        return Constant(d)
    if not isinstance(d, dict) or d.get("type") not in FORCINGS:
        raise ValueError("unknown forcing {!r}, expected one of {}".format(d, sorted(FORCINGS)))
    params = {k: v for k, v in d.items() if k != "type"}
    try:
        return FORCINGS[d["type"]](**params)
    except TypeError as e:
        raise ValueError("bad parameters for forcing {!r}: {}".format(d["type"], e))
