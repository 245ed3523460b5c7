"""Points on the extended complex plane (Riemann sphere).

A pure qubit state |0> + z e^{i phi} |1> (up to normalization) is labelled by
a single point z of the sphere: either a finite complex number or the one
distinguished point at infinity, which encodes the state |1>.
"""

from __future__ import annotations

import math
from typing import Union


class _PointAtInfinity:
    """Singleton marker for the point at infinity (no signed infinities)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (_PointAtInfinity, ())


INFINITY = _PointAtInfinity()

SpherePoint = Union[complex, _PointAtInfinity]


def is_infinite(z: SpherePoint) -> bool:
    return z is INFINITY


def as_point(z) -> SpherePoint:
    """Coerce a number to a sphere point.

    Real and complex inputs are accepted; any non-finite component maps to
    the single INFINITY point, NaN is rejected.
    """
    if z is INFINITY:
        return INFINITY
    w = complex(z)
    if math.isnan(w.real) or math.isnan(w.imag):
        raise ValueError("NaN is not a point of the sphere")
    if math.isinf(w.real) or math.isinf(w.imag):
        return INFINITY
    return w


def plane_distance(z: SpherePoint, w: SpherePoint) -> float:
    """Euclidean distance |z - w|; inf when exactly one point is infinite."""
    zi, wi = z is INFINITY, w is INFINITY
    if zi and wi:
        return 0.0
    if zi or wi:
        return math.inf
    return abs(z - w)


def chordal_distance(z: SpherePoint, w: SpherePoint) -> float:
    """Chordal metric on the unit sphere, 2|z-w|/sqrt((1+|z|^2)(1+|w|^2)).

    Bounded by 2 and continuous across infinity, so it is safe for
    near-return tests on orbits that may pass close to a pole.
    """
    zi, wi = z is INFINITY, w is INFINITY
    if zi and wi:
        return 0.0
    if zi or wi:
        f = w if zi else z
        return 2.0 / math.sqrt(1.0 + abs(f) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))
