import json

import numpy as np
import pytest

from maxwave.errors import DomainError, GridMismatchError, SupportError
from maxwave.grid import (Annulus, Box, FrequencyField, GridSpec, SpacetimeRegion, SpatialField,
                          Q_box, ball_mask, forward_ft, inverse_ft, load_field, make_grid,
                          restricted_l2_norm, save_field)


def test_make_grid_layout():
    g = make_grid(8)
    assert g == GridSpec(128.0, 64)
    assert g.h == 2.0
    assert g.x[g.n // 2] == 0.0
    assert g.xi[g.n // 2] == 0.0
    assert np.isclose(g.nyquist, np.pi / 2)


@pytest.mark.parametrize("N", [4, 12, 512])
def test_make_grid_rejects_unsupported_scales(N):
    with pytest.raises(ValueError):
        make_grid(N)


@pytest.mark.parametrize("L,n", [(64.0, 15), (64.0, 17), (-1.0, 32), (100.0, 16)])
def test_gridspec_validation(L, n):
    with pytest.raises(ValueError):
        GridSpec(L, n)


def test_gaussian_transform_matches_closed_form():
    # f = exp(-|x|^2/2) has fhat = exp(-|xi|^2/2) / (2 pi) in this convention.
    g = GridSpec(40.0, 128)
    X1, X2 = g.mesh()
    f = SpatialField(g, np.exp(-(X1**2 + X2**2) / 2))
    Xi1, Xi2 = g.freq_mesh()
    expected = np.exp(-(Xi1**2 + Xi2**2) / 2) / (2 * np.pi)
    got = forward_ft(f).values
    # The centred grid puts x = 0 at index n/2, so there is no phase to remove.
    assert np.abs(got - expected).max() < 1e-12


def test_round_trip_and_plancherel():
    g = GridSpec(64.0, 32)
    rng = np.random.default_rng(1)
    vals = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    f = SpatialField(g, vals)
    fh = forward_ft(f)
    assert np.abs(inverse_ft(fh).values - vals).max() < 1e-12
    assert np.isclose(f.norm(), fh.norm(), rtol=1e-12)


def test_fields_are_immutable_and_shape_checked():
    g = GridSpec(64.0, 32)
    f = SpatialField(g, np.zeros((32, 32)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1
    with pytest.raises(GridMismatchError):
        SpatialField(g, np.zeros((16, 16)))
    with pytest.raises(ValueError):
        SpatialField(g, np.full((32, 32), np.nan))


def test_declared_support_enforced():
    g = GridSpec(64.0, 32)
    vals = np.zeros((32, 32), complex)
    vals[16, 16] = 1.0  # xi = 0, outside the unit annulus
    with pytest.raises(SupportError):
        FrequencyField(g, vals, Annulus(0.5, 1.0))
    vals2 = np.zeros((32, 32), complex)
    vals2[16 + 8, 16] = 1.0  # xi_1 = 8 * dxi ~ 0.785
    FrequencyField(g, vals2, Annulus(0.5, 1.0))


def test_grid_mismatch_on_addition():
    a = FrequencyField(GridSpec(64.0, 32), np.zeros((32, 32)))
    b = FrequencyField(GridSpec(48.0, 32), np.zeros((32, 32)))
    with pytest.raises(GridMismatchError):
        a + b


def test_ball_checks_and_restricted_norm():
    g = make_grid(8)
    with pytest.raises(DomainError):
        ball_mask(g, (0.0, 0.0), 65.0)
    ones = SpatialField(g, np.ones((g.n, g.n)))
    count = ball_mask(g, (0.0, 0.0), 8.0).sum()
    assert restricted_l2_norm(ones, (0.0, 0.0), 8.0) == pytest.approx(np.sqrt(count) * g.h)
    # Boundary nodes are included: (8, 0) lies on the circle.
    assert ball_mask(g, (0.0, 0.0), 8.0)[g.index_of(8.0), g.index_of(0.0)]


def test_index_of():
    g = make_grid(8)
    assert g.index_of(0.0) == 32
    with pytest.raises(DomainError):
        g.index_of(1.0)


def test_spacetime_region_sampling():
    r = SpacetimeRegion(0.0, 1.0, 0.25)
    assert np.allclose(r.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(r.weights, [0.125, 0.25, 0.25, 0.25, 0.125])
    short = SpacetimeRegion(0.0, 1.1, 0.25)
    assert short.times[-1] == pytest.approx(1.1)
    assert short.weights.sum() == pytest.approx(1.1)
    assert r.refined().dt == 0.125
    for bad in (dict(t0=1.0, t1=0.0), dict(t0=0.0, t1=1.0, dt=0.5), dict(t0=0.0, t1=1.0, radius=-1.0)):
        with pytest.raises(ValueError):
            SpacetimeRegion(**bad)


def test_q_box():
    q = Q_box(16)
    assert (q.t0, q.t1, q.radius) == (8.0, 16.0, 16)


def test_region_masks():
    g = GridSpec(64.0, 32)
    Xi1, Xi2 = g.freq_mesh()
    ann = Annulus(0.5, 1.0)
    r = np.hypot(Xi1, Xi2)
    assert np.array_equal(ann.mask(Xi1, Xi2), (r >= 0.5) & (r <= 1.0))
    box = Box((1.0, 0.0), (0.1, 0.1))
    assert box.extent == pytest.approx(1.1)


@pytest.mark.parametrize("kind", ["frequency", "spatial"])
def test_save_load_round_trip(tmp_path, kind):
    g = GridSpec(64.0, 32)
    rng = np.random.default_rng(2)
    vals = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    field = FrequencyField(g, vals) if kind == "frequency" else SpatialField(g, vals)
    h, b = save_field(field, tmp_path / "f")
    header = json.loads(h.read_text())
    assert header["kind"] == kind and header["n"] == 32
    assert b.stat().st_size == 32 * 32 * 16
    back = load_field(tmp_path / "f")
    assert type(back) is type(field)
    assert np.array_equal(back.values, vals)


def test_save_load_keeps_support(tmp_path):
    g = GridSpec(64.0, 32)
    vals = np.zeros((32, 32), complex)
    vals[24, 16] = 1.0
    f = FrequencyField(g, vals, Annulus(0.5, 1.0, tag="A(1)"))
    save_field(f, tmp_path / "a")
    assert load_field(tmp_path / "a").declared_support == f.declared_support


def test_zero_and_plane_wave_transforms():
    g = GridSpec(64.0, 32)
    z = forward_ft(SpatialField(g, np.zeros((32, 32))))
    assert not z.values.any()
    # Plane wave at an on-grid frequency against a literal DFT sum
    # fhat(xi_m) = (2 pi)^-2 sum_x f(x) e^{-i x.xi_m} h^2.
    k0 = (3, -5)
    X1, X2 = g.mesh()
    f = np.exp(1j * (k0[0] * X1 + k0[1] * X2) * g.dxi)
    Xi1, Xi2 = g.freq_mesh()
    direct = np.empty((32, 32), dtype=complex)
    for a in range(32):
        for b in range(32):
            direct[a, b] = np.sum(f * np.exp(-1j * (X1 * Xi1[a, b] + X2 * Xi2[a, b]))) * g.h**2 / (2 * np.pi) ** 2
    got = forward_ft(SpatialField(g, f)).values
    assert np.abs(got - direct).max() < 1e-12
    spike = np.zeros((32, 32))
    spike[16 + k0[0], 16 + k0[1]] = g.dxi**-2
    assert np.abs(got - spike).max() < 1e-10


@pytest.mark.parametrize("r", [8.0, 16.0, 40.0])
def test_restricted_norm_of_constant_is_disk_area(r):
    g = make_grid(8)
    ones = SpatialField(g, np.ones((g.n, g.n)))
    assert abs(restricted_l2_norm(ones, (0.0, 0.0), r) / np.sqrt(np.pi * r * r) - 1) <= 2 * g.h / r
    assert restricted_l2_norm(SpatialField(g, np.zeros((g.n, g.n))), (0.0, 0.0), r) == 0.0


def test_restricted_norm_half_ball_direct_sum():
    g = make_grid(8)
    X1, X2 = g.mesh()
    f = np.where(X1 > 2.0, 1.5 + 0.5j, 0.0)
    total = 0.0
    for i, x1 in enumerate(g.x):
        for j, x2 in enumerate(g.x):
            if (x1 - 2.0) ** 2 + (x2 + 4.0) ** 2 <= 12.0**2:
                total += abs(f[i, j]) ** 2 * g.h**2
    got = restricted_l2_norm(SpatialField(g, f), (2.0, -4.0), 12.0)
    assert got == pytest.approx(np.sqrt(total), rel=1e-12)
    # Monotone under inclusion.
    assert restricted_l2_norm(SpatialField(g, f), (2.0, -4.0), 6.0) <= got
