import cmath
import math

import numpy as np
import pytest

from tcmap.experiments import (
    basin_grid,
    discrimination_run,
    fixed_point_multiplier_moduli,
    grid_points,
    overlap,
    phi_sweep,
    resource_estimate,
)
from tcmap.protocol import exact_step_operator, protocol_step_exact
from tcmap.rational_map import MapParams, apply_map, classify_basin_point, find_attractive_cycles
from tcmap.sphere import INFINITY
from tcmap.tavis_cummings import CoherentFieldSpec


def iterate_ideal(z, varphi, n):
    params = MapParams(varphi)
    for _ in range(n):
        z = apply_map(z, params)
    return z


# ------------------------------------------------------------------- overlap

def test_overlap_of_the_discrimination_pair():
    assert abs(overlap(-0.2, 0.2) - 0.96 / 1.04) < 1e-15


def test_overlap_of_identical_states():
    for z in (0j, 0.7 - 0.1j, INFINITY):
        assert overlap(z, z) == 1.0


def test_overlap_of_orthogonal_basis_states():
    assert overlap(0j, INFINITY) == 0.0


def test_overlap_projective_infinity_rule():
    z = 0.6 + 0.8j
    assert abs(overlap(INFINITY, z) - abs(z) / math.sqrt(1 + abs(z) ** 2)) < 1e-15


def test_overlap_symmetry_and_global_phase_invariance():
    rng = np.random.default_rng(0)
    for _ in range(50):
        z1 = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        z2 = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        assert overlap(z1, z2) == overlap(z2, z1)
        # a shared rotation of both Bloch vectors around the z axis
        ph = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        assert abs(overlap(z1 * ph, z2 * ph) - overlap(z1, z2)) < 1e-13


def test_orthogonalization_is_monotone_on_the_real_interval():
    rng = np.random.default_rng(1)
    for t in rng.uniform(0.05, 0.95, size=10):
        seq = []
        z1, z2 = -t, t
        for _ in range(8):
            seq.append(overlap(z1, z2))
            z1 = iterate_ideal(z1, 0.0, 1)
            z2 = iterate_ideal(z2, 0.0, 1)
        # strictly decreasing until the floats saturate at the fixed points
        for a, b in zip(seq, seq[1:]):
            assert b < a or a < 1e-12


# ----------------------------------------------------------------- phi sweep

def test_analytic_multiplier_moduli():
    l0, lp, lm = fixed_point_multiplier_moduli(0.0)
    assert (l0, lp, lm) == (2.0, 0.0, 0.0)
    l0, lp, lm = fixed_point_multiplier_moduli(math.pi / 4.0)
    assert abs(lp - 1.0) < 1e-12 and abs(l0 - math.sqrt(2.0)) < 1e-12


def test_sweep_emits_rows_in_grid_order():
    grid = [0.0, 0.1, 0.2]
    rows = phi_sweep(grid, burn=500)
    assert [r.varphi for r in rows] == grid
    row0 = rows[0]
    assert row0.abs_lambda_zero == 2.0
    assert row0.abs_lambda_plus_one == 0.0
    assert len(row0.cycles) == 2
    assert all(c.period == 1 and abs(c.multiplier) < 1e-9 for c in row0.cycles)


def test_sweep_finds_a_four_cycle_between_the_neutral_angles():
    rows = phi_sweep([1.01 * math.pi / 4.0])
    assert any(c.period == 4 for c in rows[0].cycles)


# --------------------------------------------------------- discrimination MC

def test_noiseless_run_reproduces_direct_iteration():
    report = discrimination_run(-0.2, 0.2, sigma=0.0, samples=3, steps=3, seed=1)
    # oracle: direct scalar iteration and the overlap formula
    z1, z2 = -0.2, 0.2
    for k in range(4):
        assert abs(report.mean_overlap[k] - overlap(z1, z2)) < 1e-13
        assert report.rms_deviation[k] < 1e-13
        z1 = iterate_ideal(z1, 0.0, 1)
        z2 = iterate_ideal(z2, 0.0, 1)
    # frozen from exact rational iteration of 2z/(1+z^2) starting at 1/5
    expected = [0.9230769230769231, 0.7422680412371134, 0.3802259058236761, 0.07791825883762012]
    for k, e in enumerate(expected):
        assert abs(report.mean_overlap[k] - e) < 1e-12


def test_run_is_deterministic_for_a_fixed_seed():
    a = discrimination_run(-0.2, 0.2, sigma=0.03, samples=500, steps=5, seed=42)
    b = discrimination_run(-0.2, 0.2, sigma=0.03, samples=500, steps=5, seed=42)
    assert np.array_equal(a.mean_overlap, b.mean_overlap)
    assert np.array_equal(a.rms_deviation, b.rms_deviation)
    c = discrimination_run(-0.2, 0.2, sigma=0.03, samples=500, steps=5, seed=43)
    assert not np.array_equal(a.mean_overlap, c.mean_overlap)


def test_noise_grows_then_collapses():
    report = discrimination_run(-0.2, 0.2, sigma=0.03, samples=2000, steps=6, seed=7)
    rms = report.rms_deviation
    assert rms[1] > rms[0]
    assert rms[5] < rms[2]
    assert report.mean_overlap[6] < 0.05
    assert np.all(report.sample_counts == 2000)
    assert report.failures == 0


def test_exact_map_decreases_faster_then_plateaus():
    op = exact_step_operator(CoherentFieldSpec(nbar=10.0))
    exact = discrimination_run(-0.2, 0.2, sigma=0.0, samples=1, steps=7, seed=3, exact_op=op)
    ideal = discrimination_run(-0.2, 0.2, sigma=0.0, samples=1, steps=7, seed=3)
    assert exact.map_kind == "exact(nbar=10)"
    # faster early orthogonalization, larger late plateau
    assert exact.mean_overlap[2] < ideal.mean_overlap[2]
    assert exact.mean_overlap[3] < ideal.mean_overlap[3]
    assert exact.mean_overlap[7] > ideal.mean_overlap[7]
    assert exact.mean_overlap[7] > 0.01


def test_exact_map_matches_scalar_steps():
    op = exact_step_operator(CoherentFieldSpec(nbar=10.0))
    report = discrimination_run(0.1 + 0.2j, 0.3, sigma=0.0, samples=1, steps=4, seed=5, exact_op=op)
    z1, z2 = 0.1 + 0.2j, 0.3 + 0j
    for k in range(5):
        assert abs(report.mean_overlap[k] - overlap(z1, z2)) < 1e-12
        if k < 4:
            z1, _ = protocol_step_exact(z1, 0.0, op)
            z2, _ = protocol_step_exact(z2, 0.0, op)


def test_vectorized_exact_step_equals_the_scalar_one():
    from tcmap.experiments import _exact_map_grid

    op = exact_step_operator(CoherentFieldSpec(nbar=8.0))
    rng = np.random.default_rng(9)
    z = np.concatenate(
        [
            rng.uniform(-0.9, 0.9, 20) + 1j * rng.uniform(-0.9, 0.9, 20),
            rng.uniform(1.5, 4.0, 20) + 1j * rng.uniform(-3.0, 3.0, 20),
            np.array([complex(np.inf, 0.0)]),
        ]
    )
    got, p = _exact_map_grid(z, 0.4, op)
    from tcmap.sphere import INFINITY, is_infinite

    for zi, gi, pi in zip(z, got, p):
        zs = INFINITY if not np.isfinite(zi) else complex(zi)
        want_z, want_p = protocol_step_exact(zs, 0.4, op)
        if is_infinite(want_z):
            assert not np.isfinite(gi)
        else:
            assert abs(gi - want_z) < 1e-12 * max(1.0, abs(want_z))
        assert abs(pi - want_p) < 1e-13


def test_invalid_arguments():
    with pytest.raises(ValueError):
        discrimination_run(0, 1, sigma=-0.1, samples=10, steps=2)
    with pytest.raises(ValueError):
        discrimination_run(0, 1, sigma=0.1, samples=0, steps=2)


# ------------------------------------------------------------------ resources

def test_resource_formula_values():
    assert resource_estimate(3, 0.0).pairs == 512
    assert resource_estimate(0, 1.23).pairs == 1
    assert resource_estimate(2, math.pi / 4.0).pairs == 256


def test_resource_powers_of_eight_are_exact():
    for n in range(11):
        assert resource_estimate(n, 0.0).pairs == 8**n


def test_resource_rejects_degenerate_angle():
    from tcmap.rational_map import DegenerateParameterError

    with pytest.raises(DegenerateParameterError):
        resource_estimate(2, math.pi / 2.0)


# ----------------------------------------------------------------- basin grid

def test_grid_points_layout():
    pts = grid_points((-2.0, 2.0, -2.0, 2.0), 5, 5)
    assert pts.shape == (5, 5)
    assert pts[0, 0] == complex(-1.6, 1.6)   # top-left
    assert pts[2, 2] == 0j                   # exact center
    assert pts[4, 4] == complex(1.6, -1.6)   # bottom-right


def test_basin_halves_at_phi_zero():
    grid = basin_grid((-2.0, 2.0, -2.0, 2.0), 5, 5, varphi=0.0)
    # discovery order: the + critical orbit lands on +1 first
    assert abs(grid.attractors[0][0] - 1.0) < 1e-12
    assert abs(grid.attractors[1][0] + 1.0) < 1e-12
    ids = grid.attractor_ids
    assert np.all(ids[:, 3:] == 0)      # right half converges to +1
    assert np.all(ids[:, :2] == 1)      # left half converges to -1
    assert np.all(ids[:, 2] == -1)      # the imaginary axis never resolves
    assert np.all(grid.iterations[:, 2] == grid.max_iter)


def test_basin_grid_agrees_with_scalar_classification():
    params = MapParams(0.95 * math.pi / 4.0)
    cycles = find_attractive_cycles(params)
    grid = basin_grid((-1.5, 1.5, -1.0, 1.0), 7, 5, varphi=params.varphi, attractors=cycles)
    pts = grid_points(grid.region, grid.width, grid.height)
    for i in range(grid.height):
        for j in range(grid.width):
            cell = classify_basin_point(pts[i, j], params, cycles, tol=0.1, max_iter=97)
            want = -1 if cell.attractor_id is None else cell.attractor_id
            assert grid.attractor_ids[i, j] == want
            assert grid.iterations[i, j] == cell.iterations


def test_basin_symmetries_at_phi_zero():
    grid = basin_grid((-2.0, 2.0, -2.0, 2.0), 8, 8, varphi=0.0)
    ids = grid.attractor_ids
    its = grid.iterations
    # z -> -z swaps the attractors, z -> conj(z) preserves them
    flipped = ids[::-1, ::-1]
    swap = np.where(flipped >= 0, 1 - flipped, flipped)
    assert np.array_equal(ids, swap)
    assert np.array_equal(its, its[::-1, ::-1])
    assert np.array_equal(ids, ids[::-1, :])
    assert np.array_equal(its, its[::-1, :])


def test_exact_basin_approaches_the_ideal_with_photon_number():
    varphi = 0.95 * math.pi / 4.0
    region = (-1.5, 1.5, -1.5, 1.5)
    cycles = find_attractive_cycles(MapParams(varphi))
    ideal = basin_grid(region, 9, 9, varphi, attractors=cycles)
    agree = {}
    for nbar in (10.0, 100.0):
        op = exact_step_operator(CoherentFieldSpec(nbar=nbar))
        ex = basin_grid(region, 9, 9, varphi, attractors=cycles, exact_op=op)
        agree[nbar] = float(np.mean(ex.attractor_ids == ideal.attractor_ids))
    assert agree[100.0] >= agree[10.0]
    assert agree[100.0] > 0.8


def test_basin_needs_attractors_for_chaotic_angles():
    with pytest.raises(ValueError):
        basin_grid((-1, 1, -1, 1), 3, 3, varphi=1.15 * math.pi / 4.0)
