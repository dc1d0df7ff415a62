"""Exact-number helpers shared by every module.

Values are Python ints or fractions.Fraction.  A Fraction whose denominator
is 1 is collapsed to int so integer-only paths stay on fast int arithmetic.
"""
from fractions import Fraction
from math import lcm

import numpy as np


def rat(v):
    """Coerce v to an exact rational (int or Fraction). Floats are refused."""
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, int):
        return int(v)
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, str):
        s = v.strip()
        if "/" in s:
            p, q = s.split("/")
            return rat(Fraction(int(p), int(q)))
        return int(s)
    raise TypeError(f"not an exact rational: {v!r}")


def norm(v):
    if type(v) is Fraction and v.denominator == 1:
        return v.numerator
    return v


def obj_array(values):
    """1-D object array of exact rationals."""
    vals = [rat(v) for v in values]
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def int_array(values):
    return np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                      dtype=np.int64).reshape(-1)


def zeros_obj(n):
    return np.zeros(n, dtype=object)


def frozen(arr):
    arr.setflags(write=False)
    return arr


def scatter_sum(index, values, size, perm=None):
    """out[k] = sum of values[i] with index[i] == k, exactly (object dtype).

    perm, if given, is a stable argsort of index (cached by callers).
    """
    out = zeros_obj(size)
    if len(index) == 0:
        return out
    if perm is None:
        perm = np.argsort(index, kind="stable")
    idx = index[perm]
    vals = values[perm]
    starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
    out[idx[starts]] = np.add.reduceat(vals, starts)
    return out


def common_denominator(values):
    dens = {v.denominator for v in values if type(v) is Fraction}
    return lcm(*dens) if dens else 1


def scaled(values, d):
    """Integer numerators of values over the common denominator d."""
    if d == 1:
        return values
    out = np.empty(len(values), dtype=object)
    out[:] = [v.numerator * (d // v.denominator) if type(v) is Fraction else v * d
              for v in values]
    return out


def absmax(values):
    """max |v| over an object array, 0 when empty."""
    if len(values) == 0:
        return 0
    return max(abs(values.max()), abs(values.min()))


def floor_log2(x):
    """floor(log2 x) for an integer x >= 1."""
    return int(x).bit_length() - 1


def ceil_log2(x):
    """ceil(log2 x) for an integer x >= 1."""
    return (int(x) - 1).bit_length()


def fmt(v):
    """Canonical text of an exact rational."""
    v = norm(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(int(v))
