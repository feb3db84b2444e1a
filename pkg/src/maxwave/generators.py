"""Structured and random inputs: Knapp caps, tiny caps, transverse strips, annulus noise.

All generators return :class:`~maxwave.grid.FrequencyField` objects with a
declared support, so the support invariant is checked at construction.
Smoothed indicators are supported *inside* the nominal set: the core is the
set shrunk by the transition width (1/8 of the half-side), and the profile
falls to zero at the nominal boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bumps import BumpProfile
from .errors import ResolutionError, SupportError
from .grid import Annulus, Box, FrequencyField, GridSpec, SpatialField, forward_ft

SMOOTHING_FRACTION = 1.0 / 8.0


def _cap(grid: GridSpec, center, half_width, raw: bool, tag: str, x0=(0.0, 0.0)):
    if half_width < 2 * grid.dxi:
        raise ResolutionError(
            f"cap half-width {half_width:.4g} is below two frequency steps ({2 * grid.dxi:.4g})")
    a = float(half_width)
    if raw:
        prof = BumpProfile("raw-indicator", center, (a, a))
    else:
        w = SMOOTHING_FRACTION * a
        prof = BumpProfile("smoothed-indicator", center, (a - w, a - w), w)
    Xi1, Xi2 = grid.freq_mesh()
    vals = prof(Xi1, Xi2).astype(complex)
    if x0[0] or x0[1]:
        vals = vals * np.exp(-1j * (Xi1 * x0[0] + Xi2 * x0[1]))
    region = Box(tuple(float(c) for c in center), (a, a), tag=tag)
    if region.extent >= grid.nyquist:
        raise SupportError(f"cap {region} leaves the band |xi_i| < {grid.nyquist:.4g}")
    return FrequencyField(grid, vals, region)


def knapp_cap(R: float, grid: GridSpec, x0=(0.0, 0.0), raw: bool = False) -> FrequencyField:
    """Smoothed indicator of ``{|xi_1 - 1| <= R^{-1/2}, |xi_2| <= R^{-1/2}}``.

    ``x0`` translates the data in space (multiplies by ``e^{-i x0.xi}``).
    Its evolution is near ``|Omega|`` on the slab ``|x_1 - x0_1 + 2t| <~ R^{1/2}``,
    ``|x_2 - x0_2| <~ R^{1/2}``, ``|t| <~ R``.
    """
    return _cap(grid, (1.0, 0.0), R ** -0.5, raw, "knapp", x0)


def tiny_cap(r: float, grid: GridSpec, raw: bool = False) -> FrequencyField:
    """Smoothed indicator of ``{|xi_1| <= r, |xi_2 - 1| <= r}``."""
    return _cap(grid, (0.0, 1.0), r, raw, "tiny-cap")


@dataclass(frozen=True)
class SharpnessRegion:
    """``{|x_1| <= a, |x_2 + 2t| <= a, |t| <= T}`` where a tiny cap interferes constructively."""

    a: float
    T: float

    def nodes(self, grid: GridSpec, dt: float = 0.125):
        """Grid nodes ``(t, i, j)`` inside the region, for ``t >= 0`` sampled at ``dt``."""
        out = []
        for t in np.arange(0.0, self.T + 1e-12, dt):
            for i, x1 in enumerate(grid.x):
                if abs(x1) > self.a:
                    continue
                for j, x2 in enumerate(grid.x):
                    if abs(x2 + 2 * t) <= self.a:
                        out.append((float(t), i, j))
        return out


def tiny_cap_region(N: float) -> SharpnessRegion:
    return SharpnessRegion(N**0.5 / 100.0, N / 100.0)


@dataclass(frozen=True)
class StripPair:
    """Two small frequency squares on the ``xi_1`` axis, a distance 1/2 apart.

    ``S1`` is centred at ``(lam + 1/4) e_1`` and ``S2`` at ``(lam - 1/4) e_1``,
    both with half-side 1/50.  ``normalized()`` gives the copies centred at
    5/4 and 3/4, the case ``lam = 1``.
    """

    lam: float = 1.0
    half_width: float = 1.0 / 50.0

    def __post_init__(self):
        k = np.log2(self.lam)
        if self.lam < 1 or abs(k - round(k)) > 1e-12:
            raise ValueError(f"lam must be a power of two >= 1, got {self.lam}")

    @property
    def S1(self) -> Box:
        return Box((self.lam + 0.25, 0.0), (self.half_width, self.half_width), tag="S1")

    @property
    def S2(self) -> Box:
        return Box((self.lam - 0.25, 0.0), (self.half_width, self.half_width), tag="S2")

    def normalized(self) -> "StripPair":
        return StripPair(1.0, self.half_width)

    @property
    def gap(self) -> float:
        return 0.5 - 2 * self.half_width


def _seeded_smooth(grid: GridSpec, region: Box, rng) -> FrequencyField:
    Xi1, Xi2 = grid.freq_mesh()
    a = np.array(region.half_widths)
    w = SMOOTHING_FRACTION * a.min()
    prof = BumpProfile("smoothed-indicator", region.center, tuple(a - w), w)
    env = prof(Xi1, Xi2)
    noise = rng.standard_normal(env.shape) + 1j * rng.standard_normal(env.shape)
    vals = env * noise
    if not np.any(vals):
        raise ResolutionError(f"no frequency node carries {region.tag} on this grid")
    f = FrequencyField(grid, vals)
    return FrequencyField(grid, vals / f.norm(), region)


def strip_data(pair: StripPair, grid: GridSpec, seed: int = 0):
    """Seeded random smooth data on ``S1`` and ``S2``, each of unit L^2 norm."""
    for s in (pair.S1, pair.S2):
        if s.extent >= grid.nyquist:
            raise SupportError(f"{s.tag} leaves the band")
    rng = np.random.default_rng(seed)
    return _seeded_smooth(grid, pair.S1, rng), _seeded_smooth(grid, pair.S2, rng)


ANNULUS_ENVELOPE = BumpProfile("smoothed-indicator", (0.0, 0.0), (0.6, 0.9), 0.1, "annulus")
ANNULUS_CUTOFF = BumpProfile("smoothed-indicator", (0.0, 0.0), (0.55, 0.95), 0.05, "annulus")
RING_RADIUS = 0.75
RING_WIDTH = 0.05


def ring_envelope(xi1, xi2):
    """Gaussian ring of radius 3/4 and width 1/20, cut off smoothly inside the annulus.

    Its inverse transform decays much faster in space than the flat-topped
    envelope, which matters when data must be negligible outside a ball.
    """
    r = np.hypot(xi1, xi2)
    return np.exp(-0.5 * ((r - RING_RADIUS) / RING_WIDTH) ** 2) * ANNULUS_CUTOFF(xi1, xi2)


def random_annulus(seed: int, grid: GridSpec, extent: float = None, ring: bool = False) -> FrequencyField:
    """Seeded complex Gaussian amplitudes under a smooth envelope supported in ``1/2 <= |xi| <= 1``.

    With ``extent`` set, the noise is first generated in space under a
    Gaussian window of that standard deviation, so the data are concentrated
    near the origin (up to the spread of the envelope's kernel); otherwise
    the amplitudes are independent at every frequency node and the data fill
    the cell.  ``ring=True`` uses :func:`ring_envelope` instead of the
    flat-topped envelope.  Unit L^2 norm.
    """
    rng = np.random.default_rng(seed)
    Xi1, Xi2 = grid.freq_mesh()
    env = ring_envelope(Xi1, Xi2) if ring else ANNULUS_ENVELOPE(Xi1, Xi2)
    shape = (grid.n, grid.n)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if extent is None:
        vals = env * noise
    else:
        X1, X2 = grid.mesh()
        window = np.exp(-(X1**2 + X2**2) / (2.0 * extent**2))
        vals = env * forward_ft(SpatialField(grid, window * noise)).values
    f = FrequencyField(grid, vals)
    return FrequencyField(grid, vals / f.norm(), Annulus(0.5, 1.0, tag="A(1)"))


def single_mode(grid: GridSpec, k1: int, k2: int, amplitude: complex = 1.0) -> FrequencyField:
    """A single frequency node ``(k1, k2) * dxi`` carrying ``amplitude``."""
    vals = np.zeros((grid.n, grid.n), dtype=complex)
    vals[grid.n // 2 + k1, grid.n // 2 + k2] = amplitude
    return FrequencyField(grid, vals)
