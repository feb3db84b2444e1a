import numpy as np
import pytest
from scipy import stats

from maxwave.errors import AccuracyError, UndefinedRatioError
from maxwave.generators import knapp_cap, random_annulus
from maxwave.grid import FrequencyField, make_grid
from maxwave.localization import (BlockWindow, build_time_blocks, domination_check,
                                  local_global_experiment, short_to_long_time_ratio, time_block_grid,
                                  wide_ball_ratio)

N = 8
TB = time_block_grid(N)


@pytest.fixture(scope="module")
def data():
    return random_annulus(0, TB, extent=N / 2, ring=True)


@pytest.fixture(scope="module")
def dec(data):
    return build_time_blocks(data, N)


def test_window_matches_disk_gaussian_oracle():
    # Disk indicator convolved with a Gaussian: P(|Z| <= R) for Z ~ N(x, sigma^2 I),
    # a noncentral chi-square probability with two degrees of freedom.
    w = BlockWindow.for_scale(N)
    assert w.plateau == pytest.approx(4 * N) and w.sigma == N / 2
    X1, X2 = TB.mesh()
    r = np.hypot(X1, X2)
    ref = stats.ncx2.cdf((w.radius / w.sigma) ** 2, 2, (r / w.sigma) ** 2)
    assert np.abs(w.sample(TB) - ref).max() < 1e-9
    assert ref[r <= w.plateau].min() >= 1 - 4e-7


def test_blocks_tile_and_are_small_loss(dec):
    assert len(dec.blocks) == N
    assert dec.tiles()
    assert [b.t for b in dec.blocks] == [N * j for j in range(1, N + 1)]
    assert dec.blocks[0].interval == (0.0, float(N))
    assert dec.max_truncation_loss < 1e-6
    # The pieces are not orthogonal, but their total mass stays a bounded multiple of ||f||^2.
    assert 1.0 <= dec.orthogonality_constant <= 8.0
    Xi1, Xi2 = TB.freq_mesh()
    r = np.hypot(Xi1, Xi2)
    for b in dec.blocks:
        assert np.all(b.piece.values[(r < 0.5 - 1.0) | (r > 1.0 + 1.0)] == 0)


def test_domination_defect_small(dec):
    rep = domination_check(dec, blocks={1, N // 2, N})
    assert len(rep.per_block) == 3
    assert rep.defect < 1e-6


def test_block_errors(data):
    with pytest.raises(AccuracyError):
        build_time_blocks(data, N, tol=1e-30)
    with pytest.raises(ValueError):
        build_time_blocks(random_annulus(0, make_grid(8)), N)


def test_zero_data_blocks():
    z = FrequencyField(TB, np.zeros((TB.n, TB.n), dtype=complex))
    d = build_time_blocks(z, N)
    assert d.orthogonality_constant == 0.0 and d.max_truncation_loss == 0.0
    assert domination_check(d).defect == 0.0


def test_ratio_experiments_basic():
    g = make_grid(8)
    f = knapp_cap(8, g)
    # A longer time range or a wider ball only adds samples.
    assert short_to_long_time_ratio(f, 8, dt=0.25) >= 1.0
    assert wide_ball_ratio(f, 8, 2, dt=0.25) >= 1.0
    with pytest.raises(ValueError):
        wide_ball_ratio(f, 8, 3)
    z = FrequencyField(g, np.zeros((g.n, g.n), dtype=complex))
    with pytest.raises(UndefinedRatioError):
        short_to_long_time_ratio(z, 8)
    with pytest.raises(UndefinedRatioError):
        wide_ball_ratio(z, 8)


def test_local_global_requires_unit_norm():
    g = make_grid(8)
    f = random_annulus(0, g)
    loc, glob = local_global_experiment(f, 8, dt=0.25)
    assert 0 < loc <= glob
    with pytest.raises(ValueError):
        local_global_experiment(f * 2.0, 8)
    with pytest.raises(UndefinedRatioError):
        local_global_experiment(f * 0.0, 8)


def test_single_cap_pieces_do_not_grow():
    f = knapp_cap(N, TB)
    d = build_time_blocks(f, N)
    assert max(b.piece.norm() for b in d.blocks) <= (1 + 1e-3) * f.norm()


@pytest.fixture(scope="module")
def dec16():
    M = 16
    return build_time_blocks(random_annulus(0, time_block_grid(M), extent=M / 2, ring=True), M)


def test_orthogonality_constant_stable_across_scales(dec, dec16):
    a, b = dec.orthogonality_constant, dec16.orthogonality_constant
    assert abs(b - a) <= 0.5 * a


def test_domination_at_larger_scale_and_plateau_ablation(data, dec16):
    assert domination_check(dec16, blocks={1, 8, 16}).defect <= 1e-4
    full = domination_check(build_time_blocks(data, N), blocks={1, N // 2, N}).defect
    halved = domination_check(build_time_blocks(data, N, plateau=2 * N), blocks={1, N // 2, N}).defect
    assert halved > 10 * full


def test_single_mode_domination_small():
    from maxwave.generators import single_mode
    # Read on the plane, a single mode is cut off at the cell edge; that edge disperses inward.
    d = build_time_blocks(single_mode(TB, 40, 10), N)
    assert domination_check(d).defect <= 1e-3


def test_single_mode_ratios_and_constants():
    from maxwave.generators import single_mode
    from maxwave.grid import ball_mask
    g = make_grid(8)
    m = single_mode(g, 30, -12)
    m = m * (1.0 / m.norm())
    assert short_to_long_time_ratio(m, 8, dt=0.25) == pytest.approx(1.0, rel=1e-12)
    nodes = {r: ball_mask(g, (0.0, 0.0), r).sum() for r in (8.0, 16.0)}
    ratio = wide_ball_ratio(m, 8, 2, dt=0.25)
    assert ratio == pytest.approx(np.sqrt(nodes[16.0] / nodes[8.0]), rel=1e-12)
    assert ratio == pytest.approx(2.0, rel=0.03)
    c0 = abs(m.values).max() * g.dxi**2
    loc, glob = local_global_experiment(m, 8, dt=0.25)
    assert glob == pytest.approx(c0 * g.L, rel=1e-12)
    assert loc / (c0 * 8) == pytest.approx(np.sqrt(np.pi), rel=0.03)


def test_far_data_make_global_dominate():
    g = make_grid(8)
    # Placed a quarter cell behind the origin, the packet moves further away during [0, N].
    f = knapp_cap(8, g, x0=(-g.L / 4, 0.0))
    f = f * (1.0 / f.norm())
    loc, glob = local_global_experiment(f, 8, dt=0.25)
    near = knapp_cap(8, g)
    loc0, _ = local_global_experiment(near * (1.0 / near.norm()), 8, dt=0.25)
    assert glob > 20 * loc and loc < 0.15 * loc0


@pytest.mark.slow
def test_orthogonality_constant_within_factor_two_across_scales_and_seeds():
    cs = []
    for M, seeds in ((8, range(5)), (16, range(5)), (32, range(5)), (64, (0,))):
        g = time_block_grid(M)
        for s in seeds:
            cs.append(build_time_blocks(random_annulus(s, g, extent=M / 2, ring=True), M).orthogonality_constant)
    assert max(cs) < 2 * min(cs)
