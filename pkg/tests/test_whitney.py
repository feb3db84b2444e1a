import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxwave.errors import DepthError
from maxwave.generators import random_annulus
from maxwave.grid import GridSpec, make_grid
from maxwave.whitney import (ROOT, WhitneyCube, WhitneyPartition, close, coverage_multiplicity,
                             cube_of, decompose_annulus, default_j_min, frequency_piece,
                             pair_coverage_check, partner_counts, product_identity, related,
                             whitney_pairs)

SMALL = GridSpec(64.0, 32)


def _meets_annulus_by_sampling(c, m=65):
    s = np.linspace(0, c.side, m)
    a, b = np.meshgrid(c.lo[0] + s, c.lo[1] + s, indexing="ij")
    r = np.hypot(a, b)
    return bool(np.any((r >= 0.5) & (r <= 1.0)))


def test_cube_counts_against_sampling():
    cubes = decompose_annulus(-3)
    assert {j: len(v) for j, v in cubes.items()} == {0: 4, -1: 16, -2: 56, -3: 192}
    for j in (-1, -2, -3):
        m = 2 ** (-j)
        every = [WhitneyCube(j, k) for k in itertools.product(range(-m, m), repeat=2)]
        sampled = {c for c in every if _meets_annulus_by_sampling(c)}
        assert sampled == set(cubes[j])


@pytest.mark.parametrize("j", [0, -1, -2, -3])
def test_pairs_match_exhaustive_search(j):
    cubes = decompose_annulus(j)[j]
    brute = {(a, b) for a in cubes for b in cubes if related(a, b)}
    assert set(whitney_pairs(j, cubes)) == brute


def test_partner_counts_bounded():
    expected_max = {0: 1, -1: 9, -2: 13, -3: 15, -4: 15}
    for j, m in expected_max.items():
        assert max(partner_counts(j).values()) == m


def test_cube_basics():
    c = WhitneyCube(-2, (1, -3))
    assert c.side == 0.25 and np.allclose(c.center, (0.375, -0.625))
    assert c.parent == WhitneyCube(-1, (0, -2))
    assert c in c.parent.children()
    assert WhitneyCube(0, (0, 0)).parent is ROOT and len(ROOT.children()) == 4
    assert close(ROOT, ROOT)
    assert c.contains((0.3, -0.7)) and not c.contains((0.3, -0.4))
    assert cube_of((1.0, 1.0), 0) == WhitneyCube(0, (0, 0))
    assert cube_of((-1.0, 0.999), -1) == WhitneyCube(-1, (-2, 1))
    assert WhitneyCube(0, (0, 0)).distance(WhitneyCube(0, (-1, -1))) == 0.0
    assert WhitneyCube(-2, (0, 0)).distance(WhitneyCube(-2, (2, 3))) == pytest.approx(np.hypot(0.25, 0.5))
    assert WhitneyCube(-1, (0, -1)).norm_range() == (0.0, pytest.approx(np.hypot(0.5, 0.5)))
    with pytest.raises(ValueError):
        close(WhitneyCube(0, (0, 0)), WhitneyCube(-1, (0, 0)))
    with pytest.raises(ValueError):
        decompose_annulus(-9)


def test_default_j_min():
    # dxi = 2 pi / 128 = 0.049, so the first dyadic side below it is 2^-5.
    assert default_j_min(make_grid(8)) == -5
    assert default_j_min(make_grid(256)) == -8


points = st.tuples(st.floats(-1, 1), st.floats(-1, 1))


@settings(max_examples=200, deadline=None)
@given(points, points)
def test_each_separated_pair_is_covered_exactly_once(a, b):
    j_min = -6
    try:
        j, ca, cb = pair_coverage_check(a, b, j_min)
    except DepthError:
        assert close(cube_of(a, j_min), cube_of(b, j_min))
        return
    assert related(ca, cb)
    assert coverage_multiplicity(a, b, j_min) == 1


def test_well_separated_pairs_always_covered():
    with pytest.raises(DepthError):
        pair_coverage_check((0.6, 0.1), (0.6, 0.1), -4)
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = rng.uniform(-1, 1, 2)
        b = a + 4 * 2.0**-5 * np.array([np.cos(u := rng.uniform(0, 2 * np.pi)), np.sin(u)]) * 1.01
        if np.all(np.abs(b) <= 1):
            pair_coverage_check(a, b, -5)


def test_partition_nested_and_unit():
    P = WhitneyPartition(SMALL, -3)
    Xi1, Xi2 = SMALL.freq_mesh()
    r = np.hypot(Xi1, Xi2)
    ann = (r >= 0.5) & (r <= 1.0)
    assert P.covered[ann].all()
    for j in range(-3, 1):
        total = sum(P.phi[j].values())
        assert np.abs(total[ann] - 1).max() < 1e-14
        assert all(v.min() >= 0 for v in P.phi[j].values())
    for c, v in P.phi[-2].items():
        kids = [P.phi[-3][k] for k in c.children() if k in P.phi[-3]]
        assert np.array_equal(v, sum(kids[1:], kids[0].copy()))
    f = random_annulus(0, SMALL)
    m = P.masses(f, -3)
    assert sum(m.values()) == pytest.approx(np.sum(np.abs(f.values) ** 2))
    c = next(iter(P.phi[-3]))
    assert np.array_equal(frequency_piece(f, c, P).values, f.values * P.phi[-3][c])
    assert not frequency_piece(f, WhitneyCube(-3, (50, 50)), P).values.any()
    with pytest.raises(ValueError):
        P.pieces(random_annulus(0, make_grid(8)), 0)


def test_product_identity_exact():
    P = WhitneyPartition(SMALL, -3)
    rep = product_identity(random_annulus(1, SMALL), 0.7, P)
    assert rep.relative_error < 1e-12
    assert rep.remainder_pair_mass_fraction < 0.1
    assert rep.pairs_per_scale[0] == 4


def test_parents_contain_centres_and_cubes_cover_the_annulus():
    cubes = decompose_annulus(-4)
    assert 4 <= len(cubes[0]) <= 12
    rng = np.random.default_rng(3)
    r = rng.uniform(0.5, 1.0, 2000)
    th = rng.uniform(0, 2 * np.pi, 2000)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    for j, level in cubes.items():
        for c in level:
            if j < 0:
                assert c.parent.contains(c.center) and c.parent in cubes[j + 1]
        kept = set(level)
        assert all(cube_of(p, j) in kept for p in pts)


def test_face_neighbours_and_identical_cubes_are_not_related():
    c = WhitneyCube(-2, (1, 1))
    assert not related(c, c)
    assert not related(c, WhitneyCube(-2, (2, 1))) and not related(c, WhitneyCube(-2, (1, 0)))
    # Across a face of the parents, one step further out.
    assert related(c, WhitneyCube(-2, (3, 1)))


def test_axis_points_are_resolved_at_a_coarse_scale():
    j, a, b = pair_coverage_check((0.75, 0.0), (0.0, 0.75), -6)
    assert j in (-1, 0) and related(a, b)


def test_single_cube_piece_is_the_data_and_piece_masses_are_bounded():
    from maxwave.bumps import BumpProfile
    from maxwave.grid import FrequencyField
    P = WhitneyPartition(SMALL, -3)
    Xi1, Xi2 = SMALL.freq_mesh()
    cap = BumpProfile("smoothed-indicator", (0.5, 0.5), (0.08, 0.08), 0.02)(Xi1, Xi2)
    f = FrequencyField(SMALL, cap.astype(complex))
    piece = frequency_piece(f, WhitneyCube(0, (0, 0)), P)
    assert np.abs(piece.values - f.values).max() < 1e-14
    g = random_annulus(2, SMALL)
    total = g.norm() ** 2
    for j in range(-3, 1):
        s = sum(p.norm() ** 2 for p in P.pieces(g, j).values())
        assert total / 4 <= s <= total * (1 + 1e-12)
