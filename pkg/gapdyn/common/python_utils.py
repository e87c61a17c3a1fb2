# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

import math
import logging

import numpy as np


logger = logging.getLogger(__name__)

INF = math.inf


def as_vector(x, name="x"):
    """Convert scalars and sequences into a 1-D float array.

    Args:
        x (float or array_like): Value to convert.
        name (str): Name used in error messages.

    Returns:
        np.array: 1-D float array, never empty.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError("{} must be a scalar or a 1-D vector, got shape {}".format(name, arr.shape))
    if arr.size == 0:
        raise ValueError("{} must not be empty".format(name))
    return arr


def extended_real(value):
    """Validate an extended real, i.e. a real number or +inf.

    Args:
        value (float): Candidate value.

    Returns:
        float: The value as a python float.

    Raises:
        ValueError: For NaN and for -inf, which is never representable.
    """
    value = float(value)
    if math.isnan(value):
        raise ValueError("extended reals cannot be NaN")
    if value == -INF:
        raise ValueError("-inf is not an extended real")
    return value


def ext_sum(*terms):
    """Add extended reals with a + (+inf) = +inf.

    A +inf term absorbs everything else, so 0*inf style NaNs from upstream
    arithmetic never leak into the result.

    Returns:
        float: The sum, or +inf.
    """
    total = 0.0
    for term in terms:
        term = float(term)
        if term == INF:
            return INF
        total += term
    return total


def ext_scale(a, value):
    """Scale an extended real by a nonnegative factor, with 0*(+inf) = 0.

    Args:
        a (float): Nonnegative factor.
        value (float): Extended real.

    Returns:
        float: a*value.
    """
    if a < 0:
        raise ValueError("extended reals can only be scaled by a >= 0, got {}".format(a))
    if value == INF:
        return 0.0 if a == 0 else INF
    return a * value


def relative_error(actual, expected, floor=1.0):
    """Relative error |actual - expected| / max(floor, |expected|), elementwise max.

    Args:
        actual (array_like): Computed values.
        expected (array_like): Reference values.
        floor (float): Lower bound of the denominator, avoids blowing up near zero.

    Returns:
        float: Largest relative error.
    """
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    denom = np.maximum(floor, np.abs(expected))
    return float(np.max(np.abs(actual - expected) / denom))


def central_difference(func, x, h):
    """Central finite difference gradient of a scalar function.

    Args:
        func (callable): Function of a 1-D array returning a float.
        x (np.array): Evaluation point.
        h (float): Step.

    Returns:
        np.array: Gradient estimate, same shape as x.
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (func(x + step) - func(x - step)) / (2.0 * h)
    return grad
