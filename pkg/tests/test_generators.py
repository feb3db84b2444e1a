import numpy as np
import pytest

from maxwave.errors import ResolutionError, SupportError
from maxwave.generators import (ANNULUS_ENVELOPE, StripPair, knapp_cap, random_annulus, ring_envelope,
                                single_mode, strip_data, tiny_cap, tiny_cap_region)
from maxwave.grid import GridSpec, make_grid
from maxwave.propagator import evolve

G = make_grid(64)


@pytest.mark.parametrize("R", [8, 64, 256])
def test_knapp_norm_scales_like_cap_side(R):
    f = knapp_cap(R, G)
    ratio = f.norm() / (2 * np.pi * R**-0.5)
    assert 0.5 <= ratio <= 2.0
    Xi1, Xi2 = G.freq_mesh()
    assert f.mass_outside(f.declared_support) == 0.0
    # The core of the smoothed indicator is flat.
    core = (np.abs(Xi1 - 1) <= 0.8 * R**-0.5) & (np.abs(Xi2) <= 0.8 * R**-0.5)
    assert np.allclose(f.values[core], 1.0)


def test_knapp_translation_and_raw():
    f0 = knapp_cap(64, G)
    f1 = knapp_cap(64, G, x0=(10.0, -4.0))
    assert np.allclose(np.abs(f0.values), np.abs(f1.values))
    u0, u1 = evolve(f0, 0.0).values, evolve(f1, 0.0).values
    assert np.allclose(np.roll(u0, (5, -2), axis=(0, 1)), u1)
    raw = knapp_cap(64, G, raw=True)
    assert set(np.unique(raw.values.real)) == {0.0, 1.0}


def test_cap_errors():
    with pytest.raises(ResolutionError):
        knapp_cap(1e6, G)
    with pytest.raises(SupportError):
        tiny_cap(0.7, G)


def test_tiny_cap_interferes_constructively():
    # On the region the phase x.xi + t|xi|^2 is constant up to a r + 2 T r^2 = 0.03,
    # so |e^{itDelta} f| is within cos(0.03) of the L^1 norm of the (nonnegative) data.
    N = 64
    r = N**-0.5
    f = tiny_cap(r, G)
    l1 = np.sum(np.abs(f.values)) * G.dxi**2
    nodes = tiny_cap_region(N).nodes(G)
    assert nodes
    for t, i, j in nodes:
        assert abs(evolve(f, t).values[i, j]) >= np.cos(0.03) * l1


def test_strip_pair_geometry():
    p = StripPair()
    assert p.S1.center == (1.25, 0.0) and p.S2.center == (0.75, 0.0)
    assert p.gap == pytest.approx(0.46)
    assert StripPair(4.0).normalized() == p
    with pytest.raises(ValueError):
        StripPair(3.0)
    with pytest.raises(ValueError):
        StripPair(0.5)


def test_strip_data_deterministic_unit_norm():
    a1, b1 = strip_data(StripPair(), G, seed=5)
    a2, b2 = strip_data(StripPair(), G, seed=5)
    assert np.array_equal(a1.values, a2.values) and np.array_equal(b1.values, b2.values)
    assert a1.norm() == pytest.approx(1.0) and b1.norm() == pytest.approx(1.0)
    assert a1.mass_outside(StripPair().S1) == 0.0
    c, _ = strip_data(StripPair(), G, seed=6)
    assert not np.allclose(c.values, a1.values)
    with pytest.raises(SupportError):
        strip_data(StripPair(2.0), G)
    with pytest.raises(ResolutionError):
        strip_data(StripPair(1.0, 1e-4), G)


@pytest.mark.parametrize("kw", [{}, {"extent": 8.0}, {"extent": 8.0, "ring": True}])
def test_random_annulus(kw):
    g = make_grid(16)
    f = random_annulus(3, g, **kw)
    assert f.norm() == pytest.approx(1.0)
    assert f.mass_outside(f.declared_support) == 0.0
    assert np.array_equal(f.values, random_annulus(3, g, **kw).values)
    assert not np.allclose(f.values, random_annulus(4, g, **kw).values)


def test_localized_data_concentrate():
    # The ring envelope has a faster-decaying kernel than the flat-topped one.
    g = make_grid(16)
    X1, X2 = g.mesh()
    far = np.hypot(X1, X2) > 100

    def tail(ring):
        u = evolve(random_annulus(0, g, extent=8.0, ring=ring), 0.0).values
        return np.sum(np.abs(u[far]) ** 2) * g.h**2

    assert tail(True) < 1e-9
    assert tail(False) > 1e3 * tail(True)


def test_envelopes():
    assert ANNULUS_ENVELOPE(0.75, 0.0) == 1.0 and ANNULUS_ENVELOPE(0.45, 0.0) == 0.0
    assert ring_envelope(0.75, 0.0) == pytest.approx(1.0)
    assert ring_envelope(0.5, 0.0) == 0.0 and ring_envelope(1.0, 0.0) == 0.0


def test_single_mode():
    g = GridSpec(64.0, 32)
    f = single_mode(g, 2, -3, 2.0)
    u = evolve(f, 0.0).values
    X1, X2 = g.mesh()
    assert np.allclose(u, 2.0 * g.dxi**2 * np.exp(1j * (2 * X1 - 3 * X2) * g.dxi))


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_knapp_dual_slab_constructive(sign):
    R = 256
    f = knapp_cap(R, G)
    mass = np.sum(f.values.real) * G.dxi**2
    a = R**0.5 / 10
    j0 = G.index_of(0.0)
    seen = 0
    for t in sign * np.linspace(0.0, R / 10, 9):
        u = evolve(f, t).values
        for i, x1 in enumerate(G.x):
            if abs(x1 + 2 * t) <= a:
                for j in range(j0 - 1, j0 + 2):
                    if abs(G.x[j]) <= a:
                        assert abs(u[i, j]) >= 0.5 * mass
                        seen += 1
    assert seen >= 9


def test_tiny_cap_norm_scales_with_side_and_region_values():
    from maxwave.grid import Q_box
    from maxwave.norms import l2x_linfty_t
    ratios = [tiny_cap(r, G).norm() / r for r in (1 / 4, 1 / 8, 1 / 16)]
    assert max(ratios) / min(ratios) <= 1.2
    N, r = 64, 1 / 8
    f = tiny_cap(r, G)
    vals = [abs(evolve(f, t).values[i, j]) for t, i, j in tiny_cap_region(N).nodes(G)[::50]]
    assert min(vals) >= 0.5 * r * r
    assert l2x_linfty_t(f, Q_box(N, 0.25)) / (r * r * N**0.5) >= 0.02
