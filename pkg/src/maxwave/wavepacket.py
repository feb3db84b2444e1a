"""Wave-packet decomposition of strip data at scale ``R``.

The data are first cut in frequency by a smooth partition of unity
subordinate to the cells ``v + R^{-1/2}[-1/2, 1/2]^2``, ``v`` in
``R^{-1/2} Z^2``, then each piece is multiplied by the translates of a de la
Vallee-Poussin window at spacing ``R^{1/2}``.  Translates of that window sum
to one on the periodic cell, so the packets reproduce the data exactly.

A tube ``T`` carries the lattice point ``x(T)`` of its window and the cell
centre ``v(T)``; its packet travels along ``x(T) + 2 t v(T)`` (group velocity
of ``e^{it|xi|^2}`` is ``2 xi``).  Distances to the core are periodic.

Packets are stored lazily: the decomposition keeps one spatial array per
velocity cell and the unshifted window, and builds a packet on request.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .bumps import smooth_step
from .errors import DomainError, ResolutionError
from .generators import StripPair
from .grid import (Box, FrequencyField, GridSpec, SpacetimeRegion, SpatialField,
                   forward_ft, inverse_ft)
from .propagator import evolve


def wavepacket_grid(R: float) -> GridSpec:
    """Cell of side ``64 R^{1/2}`` with spacing 2: 64 windows per axis, band edge pi/2."""
    s = int(round(np.sqrt(R)))
    if s * s != int(R):
        raise ValueError(f"R must be a perfect square, got {R}")
    return GridSpec(64.0 * s, 32 * s)


@dataclass(frozen=True)
class Tube:
    """Lattice tube: window centre ``x``, velocity cell centre ``v``, strip tag."""

    R: float
    x: tuple
    v: tuple
    strip: str = ""

    def core(self, t: float) -> np.ndarray:
        return np.asarray(self.x, dtype=float) + 2.0 * t * np.asarray(self.v, dtype=float)


def _strip_box(strip) -> Box:
    if isinstance(strip, Box):
        return strip
    pair = StripPair()
    boxes = {"S1": pair.S1, "S2": pair.S2}
    if strip not in boxes:
        raise ValueError(f"strip must be 'S1', 'S2' or a Box, got {strip!r}")
    return boxes[strip]


def _segment_distance(c, a, b):
    """Distance from point ``c`` to the segment ``[a, b]``."""
    d = b - a
    dd = float(d @ d)
    s = 0.0 if dd == 0 else float(np.clip((c - a) @ d / dd, 0.0, 1.0))
    return float(np.hypot(*(a + s * d - c)))


def tube_lattice(R: float, strip, region: SpacetimeRegion) -> list:
    """Lattice tubes whose core ``{|x - x(T) - 2tv(T)| <= R^{1/2}, R/2 <= t <= R}`` meets ``region``.

    ``region`` is a ball (``radius``) times a time interval.  Velocities are
    lattice points inside the strip box.
    """
    box = _strip_box(strip)
    tag = box.tag
    s = np.sqrt(R)
    dv = 1.0 / s
    lo = np.array(box.center) - np.array(box.half_widths)
    hi = np.array(box.center) + np.array(box.half_widths)
    v1 = np.arange(np.ceil(lo[0] / dv - 1e-9), np.floor(hi[0] / dv + 1e-9) + 1) * dv
    v2 = np.arange(np.ceil(lo[1] / dv - 1e-9), np.floor(hi[1] / dv + 1e-9) + 1) * dv
    t0, t1 = max(R / 2.0, region.t0), min(float(R), region.t1)
    if t0 > t1 or region.radius is None:
        return []
    c = np.asarray(region.center, dtype=float)
    reach = region.radius + s
    tubes = []
    for a in v1:
        for b in v2:
            v = np.array([a, b])
            # Positions x with x + 2tv within reach of c for some t.
            p0, p1 = c - 2 * t1 * v, c - 2 * t0 * v
            blo = np.minimum(p0, p1) - reach
            bhi = np.maximum(p0, p1) + reach
            for i in range(int(np.ceil(blo[0] / s)), int(np.floor(bhi[0] / s)) + 1):
                for j in range(int(np.ceil(blo[1] / s)), int(np.floor(bhi[1] / s)) + 1):
                    x = np.array([i * s, j * s])
                    if _segment_distance(c, x + 2 * t0 * v, x + 2 * t1 * v) <= reach:
                        tubes.append(Tube(float(R), (float(x[0]), float(x[1])),
                                          (float(a), float(b)), tag))
    return tubes


def _cell_profile(xi, c, side):
    """Smoothed indicator of ``[c - side/2, c + side/2]`` widened by ``side/8``."""
    w = side / 8.0
    d = np.abs(xi - c) - side / 2.0
    return smooth_step(d / w) * (d < w)


@dataclass
class WavePacketDecomp:
    """Packets ``phi_T = w_{x(T)} f_{v(T)} / c_T`` with ``c_T = ||w_{x(T)} f_{v(T)}||_2``.

    Attributes
    ----------
    R : float
    grid : GridSpec
    tubes : list of Tube
    coefficients : ndarray of float
        ``c_T`` in the order of ``tubes``.
    """

    R: float
    grid: GridSpec
    tubes: list
    coefficients: np.ndarray
    strip: str = ""
    _pieces: dict = field(default_factory=dict, repr=False)
    _window: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.tubes)}

    @property
    def spacing(self) -> float:
        return float(np.sqrt(self.R))

    def window(self, x) -> np.ndarray:
        """The window translated to the lattice point ``x`` (periodically)."""
        shift = [int(round(c / self.grid.h)) for c in x]
        return np.roll(self._window, shift, axis=(0, 1))

    def generator_array(self, tube: Tube) -> np.ndarray:
        """Spatial values of ``phi_T`` at time 0 (unnormalized if ``c_T = 0``)."""
        c = self.coefficients[self._index[tube]]
        vals = self.window(tube.x) * self._pieces[tube.v]
        return vals / c if c > 0 else vals

    def generator(self, tube: Tube) -> FrequencyField:
        return forward_ft(SpatialField(self.grid, self.generator_array(tube)))

    def coefficient_constant(self, f_norm: float) -> float:
        """``(sum |c_T|^2)^{1/2} / ||f||_2``."""
        return float(np.sqrt(np.sum(self.coefficients**2)) / f_norm)

    def significant(self, rel_tol: float = 1e-8) -> list:
        """Tubes with ``c_T > rel_tol * (sum |c_T|^2)^{1/2}``."""
        total = np.sqrt(np.sum(self.coefficients**2))
        return [t for t, c in zip(self.tubes, self.coefficients) if c > rel_tol * total]

    def to_json(self) -> str:
        """Tube list and coefficients (the data themselves are not serialized)."""
        rec = {
            "R": self.R,
            "grid": {"L": self.grid.L, "n": self.grid.n},
            "strip": self.strip,
            "tubes": [{"x": list(t.x), "v": list(t.v), "c": float(c)}
                      for t, c in zip(self.tubes, self.coefficients)],
        }
        return json.dumps(rec, sort_keys=True)


def decompose(fhat: FrequencyField, R: float, strip: str = "") -> WavePacketDecomp:
    """Gabor-type wave-packet decomposition of ``fhat`` at scale ``R``.

    Raises
    ------
    ResolutionError
        If ``R^{-1/2} < 2 dxi``, the window spacing is not a whole number of
        nodes, or the packets would reach the band edge.
    """
    g = fhat.grid
    side = 1.0 / np.sqrt(R)
    if side < 2 * g.dxi:
        raise ResolutionError(f"cell side {side:.4g} is below two frequency steps ({2 * g.dxi:.4g})")
    s = np.sqrt(R)
    step = s / g.h
    m = g.L / s
    if abs(step - round(step)) > 1e-9 or abs(m - round(m)) > 1e-9:
        raise ResolutionError("window spacing must divide the cell into whole numbers of nodes")
    step, m = int(round(step)), int(round(m))

    vals = fhat.values
    nz = np.nonzero(vals)
    if nz[0].size == 0:
        return WavePacketDecomp(float(R), g, [], np.zeros(0), strip, {}, _window_array(g, s))
    xi = g.xi
    # Window translates widen the spectrum by less than 2/s on each axis.
    reach = max(np.abs(xi[nz[0]]).max(), np.abs(xi[nz[1]]).max()) + 2.0 / s
    if reach >= g.nyquist:
        raise ResolutionError(f"packets reach |xi_i| = {reach:.4g}, beyond the band edge {g.nyquist:.4g}")
    k1 = np.arange(np.floor(xi[nz[0]].min() / side) - 1, np.ceil(xi[nz[0]].max() / side) + 2)
    k2 = np.arange(np.floor(xi[nz[1]].min() / side) - 1, np.ceil(xi[nz[1]].max() / side) + 2)
    p1 = {a: _cell_profile(xi, a * side, side) for a in k1}
    p2 = {b: _cell_profile(xi, b * side, side) for b in k2}
    total1 = sum(p1.values())
    total2 = sum(p2.values())
    safe1 = np.where(total1 > 0, total1, 1.0)
    safe2 = np.where(total2 > 0, total2, 1.0)

    window = _window_array(g, s)
    w2hat = sfft.fft2(np.abs(window) ** 2)
    pieces, tubes, coefs = {}, [], []
    for a in k1:
        for b in k2:
            phi = np.outer(p1[a] / safe1, p2[b] / safe2)
            piece = vals * phi
            if not np.any(piece):
                continue
            v = (float(a * side), float(b * side))
            fv = inverse_ft(FrequencyField(g, piece)).values
            pieces[v] = fv
            # c_T^2 = sum_x |w(x - x_T)|^2 |f_v(x)|^2 h^2 for every lattice shift at once.
            corr = sfft.ifft2(np.conj(w2hat) * sfft.fft2(np.abs(fv) ** 2)).real * g.h**2
            for i in range(m):
                for j in range(m):
                    sh1, sh2 = (i - m // 2) * step, (j - m // 2) * step
                    c2 = corr[sh1 % g.n, sh2 % g.n]
                    tubes.append(Tube(float(R), (sh1 * g.h, sh2 * g.h), v, strip))
                    coefs.append(np.sqrt(max(c2, 0.0)))
    return WavePacketDecomp(float(R), g, tubes, np.array(coefs), strip, pieces, window)


def _window_array(grid: GridSpec, s: float) -> np.ndarray:
    """Periodized de la Vallee-Poussin window at scale ``s`` centred at the origin.

    Its translates by ``s`` sum to one on the nodes of the cell.
    """
    xi = grid.xi
    hat = np.clip(2.0 - np.abs(xi * s), 0.0, 1.0) * s / (2 * np.pi)
    # Summing the band-limited transform gives the periodized kernel exactly.
    w1 = ((np.exp(1j * np.outer(grid.x, xi)) * grid.dxi) @ hat).real
    out = np.outer(w1, w1)
    return out


def packet_field(tube: Tube, decomp: WavePacketDecomp, t: float) -> SpatialField:
    """``e^{itDelta} phi_T`` for ``R/2 <= t <= R``."""
    if not decomp.R / 2 <= t <= decomp.R:
        raise DomainError(f"t = {t} lies outside [R/2, R] = [{decomp.R / 2}, {decomp.R}]")
    return evolve(decomp.generator(tube), t)


def _accumulate(decomp: WavePacketDecomp, tubes, weights) -> FrequencyField:
    """``sum_T weight_T phi_T`` at time 0, one circular convolution per velocity cell."""
    g = decomp.grid
    what = sfft.fft2(np.fft.ifftshift(decomp._window))
    lattice = {}
    for tube, w in zip(tubes, weights):
        c = decomp.coefficients[decomp._index[tube]]
        if c == 0:
            continue
        D = lattice.setdefault(tube.v, np.zeros((g.n, g.n), dtype=complex))
        i, j = (int(round(x / g.h)) for x in tube.x)
        D[(g.n // 2 + i) % g.n, (g.n // 2 + j) % g.n] += w / c
    acc = np.zeros((g.n, g.n), dtype=complex)
    for v, D in lattice.items():
        # Weighted window translates, in centered storage.
        shifted = np.fft.fftshift(sfft.ifft2(what * sfft.fft2(np.fft.ifftshift(D))))
        acc += shifted * decomp._pieces[v]
    return forward_ft(SpatialField(g, acc))


def reconstruct(decomp: WavePacketDecomp, t: float) -> SpatialField:
    """``sum_T c_T e^{itDelta} phi_T``, summed packet by packet."""
    return evolve(_accumulate(decomp, decomp.tubes, decomp.coefficients), t)


def reconstruction_error(fhat: FrequencyField, decomp: WavePacketDecomp, times) -> dict:
    """``||sum c_T phi_T(t) - e^{itDelta} f||_2 / ||f||_2`` for each time."""
    total = _accumulate(decomp, decomp.tubes, decomp.coefficients)
    f_norm = fhat.norm()
    out = {}
    for t in times:
        diff = evolve(total, t).values - evolve(fhat, t).values
        out[float(t)] = float(np.sqrt(np.sum(np.abs(diff) ** 2)) * decomp.grid.h / f_norm)
    return out


def overlap_norm_check(decomp: WavePacketDecomp, t: float, tubes=None) -> float:
    """``||sum_T phi_T(t)||_2 / (#T)^{1/2}`` over ``tubes`` (default: significant tubes)."""
    if not decomp.R / 2 <= t <= decomp.R:
        raise DomainError(f"t = {t} lies outside [R/2, R]")
    tubes = decomp.significant() if tubes is None else tubes
    if not tubes:
        return 0.0
    s = evolve(_accumulate(decomp, tubes, np.ones(len(tubes))), t)
    return s.norm() / np.sqrt(len(tubes))


def periodic_distance(grid: GridSpec, center) -> np.ndarray:
    """Distance on the torus from every node to ``center``."""
    X1, X2 = grid.mesh()
    L = grid.L
    d1 = (X1 - center[0] + L / 2) % L - L / 2
    d2 = (X2 - center[1] + L / 2) % L - L / 2
    return np.hypot(d1, d2)


@dataclass
class PacketReport:
    sup_scaled: float
    concentration: float
    frequency_spread: float


def packet_properties(tube: Tube, decomp: WavePacketDecomp, t: float) -> PacketReport:
    """Sup times ``R^{1/2}``, mass fraction within ``10 R^{1/2} log R`` of the core,
    and max-norm distance of the frequency support from ``v(T)`` in units of ``R^{-1/2}``."""
    gen = decomp.generator(tube)
    u = evolve(gen, t).values
    R = decomp.R
    dist = periodic_distance(decomp.grid, tube.core(t))
    mass = np.abs(u) ** 2
    inside = dist <= 10 * np.sqrt(R) * np.log(R)
    Xi1, Xi2 = decomp.grid.freq_mesh()
    live = np.abs(gen.values) > 1e-14 * np.abs(gen.values).max()
    spread = np.maximum(np.abs(Xi1 - tube.v[0]), np.abs(Xi2 - tube.v[1]))[live].max()
    return PacketReport(
        sup_scaled=float(np.abs(u).max() * np.sqrt(R)),
        concentration=float(mass[inside].sum() / mass.sum()),
        frequency_spread=float(spread * np.sqrt(R)),
    )
