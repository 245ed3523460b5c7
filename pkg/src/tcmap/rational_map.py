"""The quadratic rational map induced by one postselected protocol step.

For gate angle varphi the map on the extended complex plane is

    f(z) = 2 z cos(varphi) / (e^{-i varphi} + z^2 e^{i varphi})

with f(infinity) = 0 and f(pole) = infinity at the two poles
z^2 = -e^{-2 i varphi}.  This module implements the map together with the
standard complex-dynamics toolbox: fixed points and the two-cycle,
multipliers and stability classes, critical orbits (which locate every
attractive cycle of a degree-2 rational map, at most two of them),
backward-iteration sampling of the Julia set, and basin classification.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .sphere import INFINITY, SpherePoint, as_point, chordal_distance, is_infinite, plane_distance

# Degeneracy threshold on |cos(varphi)|: at varphi = pi/2, 3pi/2 the map is
# identically zero and not a genuine complex map.
DEGENERACY_EPS = 1e-12
# Pole test: |denominator| < POLE_EPS * max(1, |z|^2).
POLE_EPS = 1e-14
# Orbits whose modulus exceeds this are snapped to the exact point at infinity
# before the next step.
ESCAPE_RADIUS = 1e12

SUPERATTRACTIVE_EPS = 1e-9
NEUTRAL_EPS = 1e-9

# Marker used for the point at infinity inside complex ndarrays.
INF_COMPLEX = complex(np.inf, 0.0)


class DegenerateParameterError(ValueError):
    """Raised when an operation needs cos(varphi) != 0 but got a degenerate angle."""


class PoleError(ValueError):
    """Raised when a derivative is requested at a pole of the map."""


class NotACycleError(ValueError):
    """Raised when points handed in as a cycle fail the closure check."""


@dataclass(frozen=True)
class MapParams:
    """Gate angle and precomputed phases of the map."""

    varphi: float
    cos_varphi: float = field(init=False)
    e_neg: complex = field(init=False)          # e^{-i varphi}
    e_pos: complex = field(init=False)          # e^{+i varphi}
    degenerate: bool = field(init=False)

    def __post_init__(self):
        v = float(self.varphi) % (2.0 * math.pi)
        object.__setattr__(self, "varphi", v)
        object.__setattr__(self, "cos_varphi", math.cos(v))
        object.__setattr__(self, "e_neg", cmath.exp(-1j * v))
        object.__setattr__(self, "e_pos", cmath.exp(1j * v))
        object.__setattr__(self, "degenerate", abs(math.cos(v)) < DEGENERACY_EPS)


def _require_regular(params: MapParams) -> None:
    if params.degenerate:
        raise DegenerateParameterError(
            f"map is identically zero at varphi={params.varphi!r} (cos varphi ~ 0)"
        )


def apply_map(z: SpherePoint, params: MapParams) -> SpherePoint:
    """One application of the map with exact sphere semantics.

    Large |z| is evaluated through the reciprocal coordinate so that no
    intermediate overflows to NaN; a pole returns the exact INFINITY point.
    """
    _require_regular(params)
    z = as_point(z)
    if is_infinite(z):
        return 0j
    c, em, ep = params.cos_varphi, params.e_neg, params.e_pos
    if abs(z) <= 1.0:
        den = em + z * z * ep
        if abs(den) < POLE_EPS * max(1.0, abs(z) ** 2):
            return INFINITY
        return 2.0 * z * c / den
    w = 1.0 / z
    den = em * w * w + ep
    if abs(den) < POLE_EPS:
        return INFINITY
    return 2.0 * c * w / den


def map_derivative(z: SpherePoint, params: MapParams) -> complex:
    """f'(z) = 2 cos(varphi) (e^{-i varphi} - z^2 e^{i varphi}) / (e^{-i varphi} + z^2 e^{i varphi})^2."""
    _require_regular(params)
    z = as_point(z)
    if is_infinite(z):
        raise ValueError("derivative in plane coordinates needs a finite point")
    c, em, ep = params.cos_varphi, params.e_neg, params.e_pos
    if abs(z) <= 1.0:
        den = em + z * z * ep
        if abs(den) < POLE_EPS * max(1.0, abs(z) ** 2):
            raise PoleError(f"derivative requested at a pole, z={z!r}")
        return 2.0 * c * (em - z * z * ep) / (den * den)
    w = 1.0 / z
    den = em * w * w + ep
    if abs(den) < POLE_EPS:
        raise PoleError(f"derivative requested at a pole, z={z!r}")
    return 2.0 * c * (em * w * w - ep) * (w * w) / (den * den)


def _guarded_step(z: SpherePoint, params: MapParams) -> SpherePoint:
    """apply_map with the escape guard applied to the input."""
    if not is_infinite(z) and abs(z) > ESCAPE_RADIUS:
        z = INFINITY
    return apply_map(z, params)


def iterate_map(z0: SpherePoint, params: MapParams, n: int) -> list[SpherePoint]:
    """Orbit [z0, f(z0), ..., f^n(z0)] of length n+1."""
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    _require_regular(params)
    orbit = [as_point(z0)]
    for _ in range(n):
        orbit.append(_guarded_step(orbit[-1], params))
    return orbit


def fixed_points(params: MapParams) -> tuple[complex, complex, complex]:
    """The three fixed points -1, 0, +1, independent of the gate angle."""
    del params
    return (-1.0 + 0j, 0j, 1.0 + 0j)


def two_cycle(params: MapParams) -> tuple[complex, complex]:
    """The single nontrivial two-cycle +-i sqrt(1 + 2 e^{-2 i varphi}).

    The map swaps the two points (it reduces to z -> -z on them); the cycle
    is repelling for every gate angle.
    """
    _require_regular(params)
    root = 1j * cmath.sqrt(1.0 + 2.0 * params.e_neg * params.e_neg)
    return (root, -root)


def critical_points(params: MapParams) -> tuple[complex, complex]:
    """Zeros of f', at +-e^{-i varphi}; the + point is listed first."""
    _require_regular(params)
    return (params.e_neg, -params.e_neg)


def classify_multiplier(multiplier: complex) -> str:
    """Stability class from |multiplier| with the module's numeric bands."""
    m = abs(multiplier)
    if m < SUPERATTRACTIVE_EPS:
        return "superattractive"
    if abs(m - 1.0) <= NEUTRAL_EPS:
        return "neutral"
    if m < 1.0:
        return "attractive"
    return "repelling"


@dataclass(frozen=True)
class CycleReport:
    """Periodic orbit with multiplier and stability class."""

    points: tuple[SpherePoint, ...]
    period: int
    multiplier: complex
    stability: str


def cycle_multiplier(points: Sequence[SpherePoint], params: MapParams, tol: float = 1e-8) -> CycleReport:
    """Validate a cycle and report its multiplier (chain rule over the orbit)."""
    _require_regular(params)
    pts = [as_point(p) for p in points]
    if not pts:
        raise NotACycleError("empty point list")
    for i, p in enumerate(pts):
        nxt = apply_map(p, params)
        expected = pts[(i + 1) % len(pts)]
        if chordal_distance(nxt, expected) > tol:
            raise NotACycleError(
                f"points do not close under the map at index {i} "
                f"(distance {chordal_distance(nxt, expected):.3e} > {tol:.3e})"
            )
    if any(is_infinite(p) for p in pts):
        # no periodic orbit of this map passes through infinity (it is
        # strictly preperiodic: inf -> 0 -> 0), so reject rather than invent
        # a chart change
        raise NotACycleError("cycle through infinity is not supported")
    lam = 1.0 + 0j
    for p in pts:
        lam *= map_derivative(p, params)
    return CycleReport(tuple(pts), len(pts), lam, classify_multiplier(lam))


def _burn_orbit(z: complex, params: MapParams, burn: int) -> SpherePoint:
    # inlined loop: this is the hot path of cycle searches and phi sweeps
    c, em, ep = params.cos_varphi, params.e_neg, params.e_pos
    inf = False
    for _ in range(burn):
        if inf:
            z, inf = 0j, False
            continue
        if abs(z) <= 1.0:
            den = em + z * z * ep
            if abs(den) < POLE_EPS * max(1.0, abs(z) ** 2):
                inf = True
                continue
            z = 2.0 * z * c / den
        else:
            w = 1.0 / z
            den = em * w * w + ep
            if abs(den) < POLE_EPS:
                inf = True
                continue
            z = 2.0 * c * w / den
        if abs(z) > ESCAPE_RADIUS:
            inf = True
    return INFINITY if inf else z


def _detect_cycle(start: SpherePoint, params: MapParams, max_period: int, tol: float) -> Optional[CycleReport]:
    """Smallest near-return period of the orbit of `start`, if any."""
    ref = start
    w = ref
    period = None
    for k in range(1, max_period + 1):
        w = _guarded_step(w, params)
        if chordal_distance(w, ref) < tol:
            period = k
            break
    if period is None:
        return None
    pts = [ref]
    for _ in range(period - 1):
        pts.append(_guarded_step(pts[-1], params))
    if any(is_infinite(p) for p in pts):
        return None
    lam = 1.0 + 0j
    for p in pts:
        try:
            lam *= map_derivative(p, params)
        except PoleError:
            return None
    return CycleReport(tuple(pts), period, lam, classify_multiplier(lam))


def _same_cycle(a: CycleReport, b: CycleReport, match_tol: float = 1e-6) -> bool:
    if a.period != b.period:
        return False
    return all(min(chordal_distance(p, q) for q in b.points) < match_tol for p in a.points)


def find_attractive_cycles(
    params: MapParams,
    burn: int = 10_000,
    max_period: int = 64,
    tol: float = 1e-8,
) -> list[CycleReport]:
    """All attractive cycles found by following the two critical orbits.

    A degree-2 rational map has at most two attractive cycles and each one
    attracts a critical point, so iterating both critical points for `burn`
    steps and then scanning periods up to `max_period` finds every one of
    them.  Orbits that never settle (neutral or chaotic parameter values)
    simply contribute nothing.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    _require_regular(params)
    found: list[CycleReport] = []
    for zc in critical_points(params):
        settled = _burn_orbit(zc, params, burn)
        report = _detect_cycle(settled, params, max_period, tol)
        if report is None or report.stability not in ("attractive", "superattractive"):
            continue
        if not any(_same_cycle(report, other) for other in found):
            found.append(report)
    return found


def inverse_branches(w: SpherePoint, params: MapParams) -> tuple[SpherePoint, SpherePoint]:
    """Both preimages of w, solving w e^{i varphi} z^2 - 2 cos(varphi) z + w e^{-i varphi} = 0.

    w = 0 has preimages {0, infinity}; w = infinity has the two poles.  A
    critical value returns its double preimage twice.
    """
    _require_regular(params)
    w = as_point(w)
    c, em, ep = params.cos_varphi, params.e_neg, params.e_pos
    if is_infinite(w):
        return (1j * em, -1j * em)
    if w == 0:
        return (0j, INFINITY)
    a = w * ep
    b = -2.0 * c
    cc = w * em
    disc = cmath.sqrt(b * b - 4.0 * a * cc)
    # pick the root sign that avoids cancellation in b + s
    if (b.conjugate() * disc).real >= 0.0:
        s = disc
    else:
        s = -disc
    q = -0.5 * (b + s)
    # q == 0 only if b == 0 and disc == 0, impossible for non-degenerate c
    return (q / a, cc / q)


def julia_backward_sample(
    params: MapParams,
    n_points: int,
    seed: int,
    transient: int = 50,
) -> np.ndarray:
    """Backward-orbit sample of the Julia set, seeded and deterministic.

    Starts from one point of the repelling two-cycle and at each step jumps
    to a uniformly chosen inverse branch; the first `transient` points are
    discarded.  Returns a complex array of n_points entries (a point at
    infinity, never observed in practice, would be stored as inf+0j).
    """
    if n_points < 0:
        raise ValueError("n_points must be >= 0")
    _require_regular(params)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=transient + n_points)
    z: SpherePoint = two_cycle(params)[0]
    out = np.empty(n_points, dtype=np.complex128)
    for i, bit in enumerate(bits):
        z = inverse_branches(z, params)[bit]
        if i >= transient:
            out[i - transient] = INF_COMPLEX if is_infinite(z) else z
    return out


@dataclass(frozen=True)
class BasinCell:
    """Outcome of basin classification; attractor_id None means unresolved."""

    attractor_id: Optional[int]
    iterations: int


def _normalize_attractors(attractors: Iterable) -> list[list[SpherePoint]]:
    cycles = []
    for item in attractors:
        if isinstance(item, CycleReport):
            cycles.append([as_point(p) for p in item.points])
        elif isinstance(item, (list, tuple, np.ndarray)):
            cycles.append([as_point(p) for p in item])
        else:
            cycles.append([as_point(item)])
    if not cycles:
        raise ValueError("attractor list must not be empty")
    return cycles


def classify_basin_point(
    z: SpherePoint,
    params: MapParams,
    attractors: Iterable,
    tol: float = 0.1,
    max_iter: int = 97,
) -> BasinCell:
    """Iterations until the orbit of z comes within tol of an attractor point.

    `attractors` is a sequence of cycles (CycleReport, point list, or a bare
    point).  The first attractor within tolerance wins, checked in list
    order before each map application; after max_iter unsuccessful checks
    the cell is unresolved and carries iterations = max_iter.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    cycles = _normalize_attractors(attractors)
    z = as_point(z)
    for k in range(max_iter):
        for idx, pts in enumerate(cycles):
            if any(plane_distance(z, p) < tol for p in pts):
                return BasinCell(idx, k)
        z = _guarded_step(z, params)
    return BasinCell(None, max_iter)


def apply_map_grid(z: np.ndarray, params: MapParams) -> np.ndarray:
    """Vectorized apply_map on a complex array.

    The point at infinity is encoded as any non-finite entry and produced
    as inf+0j; semantics match the scalar apply_map to rounding.
    """
    _require_regular(params)
    z = np.asarray(z, dtype=np.complex128)
    c, em, ep = params.cos_varphi, params.e_neg, params.e_pos
    out = np.empty_like(z)
    finite = np.isfinite(z.real) & np.isfinite(z.imag)
    big = finite & (np.abs(z) > 1.0)
    small = finite & ~big

    zs = z[small]
    with np.errstate(all="ignore"):
        den = em + zs * zs * ep
        val = 2.0 * c * zs / den
    pole = np.abs(den) < POLE_EPS * np.maximum(1.0, np.abs(zs) ** 2)
    val[pole] = INF_COMPLEX
    bad = ~(np.isfinite(val.real) & np.isfinite(val.imag))
    val[bad] = INF_COMPLEX
    out[small] = val

    w = 1.0 / z[big]
    with np.errstate(all="ignore"):
        den = em * w * w + ep
        val = 2.0 * c * w / den
    pole = np.abs(den) < POLE_EPS
    val[pole] = INF_COMPLEX
    bad = ~(np.isfinite(val.real) & np.isfinite(val.imag))
    val[bad] = INF_COMPLEX
    out[big] = val

    out[~finite] = 0j
    return out


def escape_guard_grid(z: np.ndarray) -> np.ndarray:
    """Vectorized escape guard: snap |z| > ESCAPE_RADIUS to the inf marker."""
    with np.errstate(all="ignore"):
        mask = np.abs(z) > ESCAPE_RADIUS
    return np.where(mask, INF_COMPLEX, z)
