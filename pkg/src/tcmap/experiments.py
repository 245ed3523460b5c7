"""Quantitative studies built on the map and protocol cores.

Covers the stability sweep over the gate angle, the two-state discrimination
Monte Carlo (amplifying the distance between two nearly parallel qubit
states), deterministic basin grids for both the ideal and the exact map,
and the exponential resource count of the postselected scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import rational_map as rm
from .protocol import ExactStepOperator, _gate_diag4, _require_gate
from .sphere import SpherePoint, as_point, is_infinite

DEFAULT_SEED = 12345


def overlap(z1: SpherePoint, z2: SpherePoint) -> float:
    """|<psi(z1)|psi(z2)>| for the states |0> + z|1> (normalized).

    Equals |1 + conj(z1) z2| / sqrt((1+|z1|^2)(1+|z2|^2)); the point at
    infinity is handled projectively, overlap(inf, z) = |z|/sqrt(1+|z|^2).
    """
    z1, z2 = as_point(z1), as_point(z2)
    i1, i2 = is_infinite(z1), is_infinite(z2)
    if i1 and i2:
        return 1.0
    if i1 or i2:
        z = z2 if i1 else z1
        return abs(z) / math.sqrt(1.0 + abs(z) ** 2)
    num = abs(1.0 + z1.conjugate() * z2)
    return num / math.sqrt((1.0 + abs(z1) ** 2) * (1.0 + abs(z2) ** 2))


@dataclass(frozen=True)
class StabilityRow:
    """Analytic fixed-point multiplier moduli plus detected critical-orbit cycles."""

    varphi: float
    abs_lambda_zero: float
    abs_lambda_plus_one: float
    abs_lambda_minus_one: float
    cycles: tuple[rm.CycleReport, ...]


def fixed_point_multiplier_moduli(varphi: float) -> tuple[float, float, float]:
    """(|lambda(0)|, |lambda(+1)|, |lambda(-1)|) = (|2 cos|, |tan|, |tan|)."""
    t = abs(math.tan(varphi))
    return (abs(2.0 * math.cos(varphi)), t, t)


def phi_sweep(
    varphis: Iterable[float],
    burn: int = 10_000,
    max_period: int = 64,
    tol: float = 1e-8,
) -> list[StabilityRow]:
    """Stability diagram rows, in grid order; degenerate angles are rejected."""
    rows = []
    for v in varphis:
        params = rm.MapParams(v)
        l0, lp, lm = fixed_point_multiplier_moduli(v)
        cycles = rm.find_attractive_cycles(params, burn=burn, max_period=max_period, tol=tol)
        rows.append(
            StabilityRow(
                varphi=float(v),
                abs_lambda_zero=l0,
                abs_lambda_plus_one=lp,
                abs_lambda_minus_one=lm,
                cycles=tuple(cycles),
            )
        )
    return rows


@dataclass(frozen=True)
class DiscriminationReport:
    """Per-step overlap statistics of the perturbed state pair."""

    mean_overlap: np.ndarray
    rms_deviation: np.ndarray
    sample_counts: np.ndarray
    failures: int
    map_kind: str
    sigma: float
    samples: int
    steps: int
    seed: int


def _ideal_trajectories(z0: np.ndarray, varphi: float, steps: int) -> list[np.ndarray]:
    params = rm.MapParams(varphi)
    traj = [z0]
    for _ in range(steps):
        traj.append(rm.apply_map_grid(rm.escape_guard_grid(traj[-1]), params))
    return traj


def _exact_map_grid(z: np.ndarray, varphi: float, op: ExactStepOperator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized exact step; returns (z', p_success), with inf markers.

    Samples whose postselection probability collapses below the null
    threshold get p_success = 0 and must be retired by the caller.
    """
    z = np.asarray(z, dtype=np.complex128)
    finite = np.isfinite(z.real) & np.isfinite(z.imag)
    with np.errstate(all="ignore"):
        big = finite & (np.abs(z) > 1.0)
    small = finite & ~big
    v = np.zeros((4, z.size), dtype=np.complex128)
    zs = z[small]
    v[0, small] = zs * zs
    v[1, small] = zs
    v[2, small] = zs
    v[3, small] = 1.0
    v[:, small] /= 1.0 + np.abs(zs) ** 2
    w = np.zeros(z.shape, dtype=np.complex128)
    w[big] = 1.0 / z[big]
    wb = w[big]
    v[0, big] = 1.0
    v[1, big] = wb
    v[2, big] = wb
    v[3, big] = wb * wb
    v[:, big] /= 1.0 + np.abs(wb) ** 2
    v[0, ~finite] = 1.0  # the state |1,1>

    u = op.matrix @ (_gate_diag4(varphi)[:, None] * v)
    amp1, amp0 = u[1], u[3]
    p = np.abs(amp1) ** 2 + np.abs(amp0) ** 2
    with np.errstate(all="ignore"):
        znew = amp1 / amp0
    # same relative pole rule as the scalar protocol_step_exact
    inf_mask = np.abs(amp0) <= 1e-14 * np.abs(amp1)
    znew[inf_mask] = rm.INF_COMPLEX
    bad = ~(np.isfinite(znew.real) & np.isfinite(znew.imag))
    znew[bad] = rm.INF_COMPLEX
    nulls = p < 1e-14
    p[nulls] = 0.0
    znew[nulls] = rm.INF_COMPLEX  # placeholder, caller retires these samples
    return znew, p


def _overlap_grid(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    f1 = np.isfinite(z1.real) & np.isfinite(z1.imag)
    f2 = np.isfinite(z2.real) & np.isfinite(z2.imag)
    a = np.where(f1, z1, 0.0)
    b = np.where(f2, z2, 0.0)
    out = np.abs(1.0 + np.conj(a) * b) / np.sqrt((1.0 + np.abs(a) ** 2) * (1.0 + np.abs(b) ** 2))
    only1 = ~f1 & f2
    only2 = f1 & ~f2
    out[only1] = np.abs(b[only1]) / np.sqrt(1.0 + np.abs(b[only1]) ** 2)
    out[only2] = np.abs(a[only2]) / np.sqrt(1.0 + np.abs(a[only2]) ** 2)
    out[~f1 & ~f2] = 1.0
    return out


def discrimination_run(
    z1: complex,
    z2: complex,
    sigma: float,
    samples: int,
    steps: int,
    varphi: float = 0.0,
    seed: int = DEFAULT_SEED,
    exact_op: Optional[ExactStepOperator] = None,
) -> DiscriminationReport:
    """Monte Carlo of the pairwise overlap under `steps` iterations.

    Each sample perturbs the real and imaginary parts of both starting
    labels with independent Gaussians of standard deviation sigma (sample i
    of z1 is paired with sample i of z2).  With an exact_op the iteration
    runs through the compressed quantum step and samples whose postselection
    nulls are excluded from that step onward and counted as failures.
    Identical seeds give bit-identical reports.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if samples < 1:
        raise ValueError("need at least one sample")
    _require_gate(varphi)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=(4, samples)) if sigma > 0 else np.zeros((4, samples))
    za = complex(z1) + noise[0] + 1j * noise[1]
    zb = complex(z2) + noise[2] + 1j * noise[3]

    mean = np.zeros(steps + 1)
    rms = np.zeros(steps + 1)
    counts = np.zeros(steps + 1, dtype=np.int64)
    alive = np.ones(samples, dtype=bool)
    failures = 0
    params = rm.MapParams(varphi) if exact_op is None else None

    for k in range(steps + 1):
        ov = _overlap_grid(za, zb)[alive]
        counts[k] = ov.size
        if ov.size:
            mean[k] = float(np.mean(ov))
            rms[k] = float(np.sqrt(np.mean((ov - mean[k]) ** 2)))
        if k == steps:
            break
        if exact_op is None:
            za = rm.apply_map_grid(rm.escape_guard_grid(za), params)
            zb = rm.apply_map_grid(rm.escape_guard_grid(zb), params)
        else:
            za, pa = _exact_map_grid(za, varphi, exact_op)
            zb, pb = _exact_map_grid(zb, varphi, exact_op)
            died = alive & ((pa == 0.0) | (pb == 0.0))
            failures += int(np.count_nonzero(died))
            alive &= ~died
    kind = "ideal" if exact_op is None else f"exact(nbar={exact_op.nbar:g})"
    return DiscriminationReport(
        mean_overlap=mean,
        rms_deviation=rms,
        sample_counts=counts,
        failures=failures,
        map_kind=kind,
        sigma=sigma,
        samples=samples,
        steps=steps,
        seed=seed,
    )


@dataclass(frozen=True)
class ResourceEstimate:
    """Qubit pairs needed for n iterations, N = ceil((8/cos^2 varphi)^n)."""

    iterations: int
    varphi: float
    pairs: int


def resource_estimate(n: int, varphi: float) -> ResourceEstimate:
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    _require_gate(varphi)
    base = 8.0 / math.cos(varphi) ** 2
    return ResourceEstimate(iterations=n, varphi=varphi, pairs=math.ceil(base**n))


@dataclass(frozen=True)
class BasinGrid:
    """Row-major classification of a rectangle of initial labels.

    Row 0 is the top of the image (largest imaginary part); attractor_ids
    holds -1 for unresolved cells, iterations the count needed (or max_iter).
    """

    region: tuple[float, float, float, float]
    width: int
    height: int
    attractor_ids: np.ndarray
    iterations: np.ndarray
    attractors: tuple[tuple[complex, ...], ...]
    max_iter: int


def grid_points(region: tuple[float, float, float, float], width: int, height: int) -> np.ndarray:
    """Complex midpoints, shape (height, width), top row = max imaginary part."""
    xmin, xmax, ymin, ymax = region
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("region must have positive extent")
    if width < 1 or height < 1:
        raise ValueError("resolution must be at least 1x1")
    xs = xmin + (np.arange(width) + 0.5) * (xmax - xmin) / width
    ys = ymax - (np.arange(height) + 0.5) * (ymax - ymin) / height
    return xs[None, :] + 1j * ys[:, None]


def basin_grid(
    region: tuple[float, float, float, float],
    width: int,
    height: int,
    varphi: float,
    tol: float = 0.1,
    max_iter: int = 97,
    attractors: Optional[Sequence] = None,
    exact_op: Optional[ExactStepOperator] = None,
) -> BasinGrid:
    """Classify every grid midpoint toward the attractive cycles.

    Attractors default to the critical-orbit search at this angle (their
    order fixes the id, hence the render color).  The iteration is the
    ideal map or, with exact_op, the compressed quantum step; the checks
    replicate classify_basin_point cell by cell.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    params = rm.MapParams(varphi)
    if attractors is None:
        found = rm.find_attractive_cycles(params)
        if not found:
            raise ValueError(
                f"no attractive cycles detected at varphi={varphi!r}; pass attractors explicitly"
            )
        cycle_points = tuple(tuple(complex(p) for p in c.points) for c in found)
    else:
        normalized = rm._normalize_attractors(attractors)
        for cyc in normalized:
            if any(is_infinite(p) for p in cyc):
                raise ValueError("attractor points must be finite")
        cycle_points = tuple(tuple(complex(p) for p in c) for c in normalized)

    z = grid_points(region, width, height).ravel()
    ids = np.full(z.size, -1, dtype=np.int64)
    iters = np.full(z.size, max_iter, dtype=np.int64)
    open_mask = np.ones(z.size, dtype=bool)

    for k in range(max_iter):
        if not open_mask.any():
            break
        for idx, cyc in enumerate(cycle_points):
            dist = np.full(z.size, np.inf)
            finite = np.isfinite(z.real) & np.isfinite(z.imag)
            for p in cyc:
                with np.errstate(all="ignore"):
                    d = np.abs(z - p)
                dist[finite] = np.minimum(dist[finite], d[finite])
            hit = open_mask & (dist < tol)
            ids[hit] = idx
            iters[hit] = k
            open_mask &= ~hit
        if exact_op is None:
            z = rm.apply_map_grid(rm.escape_guard_grid(z), params)
        else:
            z, p_succ = _exact_map_grid(z, varphi, exact_op)
            # a nulled postselection cannot continue; leave the cell unresolved
            open_mask &= ~(p_succ == 0.0)
    return BasinGrid(
        region=tuple(float(v) for v in region),
        width=width,
        height=height,
        attractor_ids=ids.reshape(height, width),
        iterations=iters.reshape(height, width),
        attractors=cycle_points,
        max_iter=max_iter,
    )
