"""Exact extended reals: Fractions plus a saturating infinity.

``INF`` is ``math.inf``.  Python already gives the saturating behaviour we
want for ``Fraction + inf``; the helpers here guard the one trap
(``inf - inf``) and handle conversion to and from the JSON encoding.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational, Real

import numpy as np

from .errors import StructuralError

INF = math.inf

# floats only show up in demos with irrational inputs (e.g. sqrt 2)
TOLERANCE = 1e-9


def is_inf(x) -> bool:
    return x == INF


def to_value(x):
    """Convert an input to an exact extended distance.

    ``None`` means infinity, strings are parsed as ``p/q`` or decimals, and
    floats are kept as floats (the only inexact route).
    """
    if x is None:
        return INF
    if isinstance(x, bool):
        raise StructuralError(f"boolean is not a number: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise StructuralError(f"cannot parse number {x!r}") from exc
    if isinstance(x, Real):
        xf = float(x)
        if math.isnan(xf):
            raise StructuralError("NaN is not a distance")
        return INF if xf == math.inf else xf
    raise StructuralError(f"not a number: {x!r}")


def fmt(x):
    """JSON encoding: ``None`` for infinity, ``"p/q"`` strings otherwise."""
    if x == INF:
        return None
    if isinstance(x, float):
        return repr(x)
    return str(Fraction(x))


def clamp(x, lo=0, hi=1):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


def add(*xs):
    total = Fraction(0)
    for x in xs:
        if x == INF:
            return INF
        total = total + x
    return total


def absdiff(x, y):
    """|x - y| with the convention |inf - inf| = 0."""
    if x == INF and y == INF:
        return Fraction(0)
    if x == INF or y == INF:
        return INF
    return abs(x - y)


def leq(x, y) -> bool:
    """x <= y, with a small tolerance only when floats are involved."""
    if isinstance(x, float) or isinstance(y, float):
        if x == INF or y == INF:
            return x <= y
        return x <= y + TOLERANCE
    return x <= y


class IntGrid:
    """Scale a family of Fractions to a common denominator.

    Lets numpy compare and add exact rationals as integers.  Infinite
    entries become a sentinel larger than any sum of three finite entries.
    """

    def __init__(self, values):
        dens = set()
        top = 0
        for v in values:
            if type(v) is float:
                if v != INF:
                    raise TypeError("IntGrid needs exact values")
                continue
            dens.add(v.denominator)
        scale = 1
        for d in dens:
            scale = math.lcm(scale, d)
        for v in values:
            if type(v) is not float:
                top = max(top, abs(v.numerator) * (scale // v.denominator))
        self.scale = scale
        self.sentinel = 4 * top + 4
        self.dtype = np.int64 if 4 * self.sentinel < 2**62 else object

    def scaled(self, v):
        if type(v) is float:
            return self.sentinel
        return v.numerator * (self.scale // v.denominator)

    def array(self, values, shape=None):
        s, inf = self.scale, self.sentinel
        arr = np.array([inf if type(v) is float else v.numerator * (s // v.denominator)
                        for v in values], dtype=self.dtype)
        return arr.reshape(shape) if shape is not None else arr

    def value(self, n):
        n = int(n)
        if n >= self.sentinel:
            return INF
        return Fraction(n, self.scale)
