"""The free evolution ``e^{it Delta} f(x) = int e^{i x.xi + i t |xi|^2} fhat(xi) dxi``.

Three evaluation paths are provided:

* :func:`evolve` applies the multiplier ``e^{it|xi|^2}`` and inverts with an
  FFT.  It is exact for trigonometric polynomials on the periodic cell.
* :class:`BoxEvaluator` evaluates the same periodic sum on a rectangular
  subset of nodes for many times at once, through separable partial DFTs
  restricted to the bounding box of the frequency support.  This is the
  workhorse of every norm in the package.
* :class:`PlaneEvaluator` evaluates the evolution on the whole plane (no
  periodic images) for data concentrated well inside the cell, switching to
  the Fresnel integral once images could reach the observation window.

:func:`evolve_oracle` is a literal double sum used only to cross-check the
fast paths on small grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .bumps import BumpProfile, rho_annulus
from .errors import AccuracyError, ResourceError, SupportError
from .grid import TWO_PI, FrequencyField, GridSpec, SpatialField, inverse_ft_array

ORACLE_MAX_N = 64
_CHUNK_ELEMENTS = 1 << 22


def _check_time(t):
    if not np.all(np.isfinite(np.asarray(t, dtype=float))):
        raise ValueError(f"time must be finite, got {t}")


def evolve(fhat: FrequencyField, t: float) -> SpatialField:
    """Values of ``e^{itDelta} f`` on every node of the periodic cell."""
    _check_time(t)
    g = fhat.grid
    Xi1, Xi2 = g.freq_mesh()
    mult = np.exp(1j * t * (Xi1**2 + Xi2**2))
    return SpatialField(g, inverse_ft_array(fhat.values * mult, g))


def evolve_oracle(fhat: FrequencyField, t: float) -> SpatialField:
    """Literal double sum ``dxi^2 sum_m fhat_m e^{i x.xi_m + i t|xi_m|^2}`` at every node."""
    _check_time(t)
    g = fhat.grid
    if g.n > ORACLE_MAX_N:
        raise ResourceError(f"direct summation is limited to n <= {ORACLE_MAX_N}, got {g.n}")
    Xi1, Xi2 = g.freq_mesh()
    xi1, xi2 = Xi1.ravel(), Xi2.ravel()
    coef = fhat.values.ravel() * np.exp(1j * t * (xi1**2 + xi2**2))
    X1, X2 = g.mesh()
    x1, x2 = X1.ravel(), X2.ravel()
    out = np.empty(x1.size, dtype=complex)
    step = max(1, _CHUNK_ELEMENTS // xi1.size)
    for s in range(0, x1.size, step):
        phase = np.outer(x1[s:s + step], xi1) + np.outer(x2[s:s + step], xi2)
        out[s:s + step] = np.exp(1j * phase) @ coef
    return SpatialField(g, out.reshape(g.n, g.n) * g.dxi**2)


def support_box(values: np.ndarray, rel_tol: float = 0.0):
    """Index bounding box ``(i0, i1, j0, j1)`` (inclusive) of entries above ``rel_tol * max``."""
    a = np.abs(values)
    peak = a.max() if a.size else 0.0
    if peak == 0:
        return None
    rows = np.nonzero((a > rel_tol * peak).any(axis=1))[0]
    cols = np.nonzero((a > rel_tol * peak).any(axis=0))[0]
    return rows[0], rows[-1], cols[0], cols[-1]


class BoxEvaluator:
    """Batched evaluation of the periodic evolution on a rectangle of nodes.

    Parameters
    ----------
    fhat : FrequencyField
    rows, cols : array of int, optional
        Spatial node indices along axis 0 and axis 1 (default: all nodes).
    x1, x2 : array of float, optional
        Arbitrary evaluation coordinates, overriding ``rows``/``cols``.
    """

    def __init__(self, fhat: FrequencyField, rows=None, cols=None, x1=None, x2=None):
        g = fhat.grid
        self.grid = g
        if x1 is None:
            x1 = g.x if rows is None else g.x[np.asarray(rows)]
        if x2 is None:
            x2 = g.x if cols is None else g.x[np.asarray(cols)]
        self.x1 = np.asarray(x1, dtype=float)
        self.x2 = np.asarray(x2, dtype=float)
        box = support_box(fhat.values)
        if box is None:
            self.F = np.zeros((1, 1), dtype=complex)
            xi1 = xi2 = np.zeros(1)
        else:
            i0, i1, j0, j1 = box
            self.F = np.array(fhat.values[i0:i1 + 1, j0:j1 + 1])
            xi1, xi2 = g.xi[i0:i1 + 1], g.xi[j0:j1 + 1]
        self.q1, self.q2 = xi1**2, xi2**2
        self.E1 = np.exp(1j * np.outer(self.x1, xi1)) * g.dxi**2
        self.E2 = np.exp(1j * np.outer(self.x2, xi2))

    @property
    def shape(self):
        return (self.x1.size, self.x2.size)

    def chunk_size(self) -> int:
        m1, m2 = self.F.shape
        nx, ny = self.shape
        per_t = nx * m1 + ny * m2 + nx * max(m2, ny) + m1 * ny
        return max(1, _CHUNK_ELEMENTS // per_t)

    def at(self, times) -> np.ndarray:
        """Array of shape ``(len(times), nx, ny)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        _check_time(times)
        A = self.E1[None] * np.exp(1j * times[:, None] * self.q1)[:, None, :]
        B = self.E2[None] * np.exp(1j * times[:, None] * self.q2)[:, None, :]
        m1, m2 = self.F.shape
        nx, ny = self.shape
        # Pick the cheaper association of A F B^T.
        if nx * m1 * m2 + nx * m2 * ny <= m1 * m2 * ny + nx * m1 * ny:
            return (A @ self.F) @ B.transpose(0, 2, 1)
        return A @ (self.F @ B.transpose(0, 2, 1))

    def stream(self, times, chunk=None):
        """Yield ``(t_chunk, values_chunk)`` pairs covering ``times`` in order."""
        times = np.asarray(times, dtype=float)
        chunk = chunk or self.chunk_size()
        for s in range(0, times.size, chunk):
            ts = times[s:s + chunk]
            yield ts, self.at(ts)


class FFTEvaluator:
    """Same interface as :class:`BoxEvaluator`, through full-grid FFTs."""

    def __init__(self, fhat: FrequencyField, rows=None, cols=None):
        g = fhat.grid
        self.grid = g
        self.values = np.array(fhat.values)
        self.rows = np.arange(g.n) if rows is None else np.asarray(rows)
        self.cols = np.arange(g.n) if cols is None else np.asarray(cols)
        Xi1, Xi2 = g.freq_mesh()
        self.q = Xi1**2 + Xi2**2
        self.x1, self.x2 = g.x[self.rows], g.x[self.cols]

    @property
    def shape(self):
        return (self.rows.size, self.cols.size)

    def chunk_size(self) -> int:
        return max(1, _CHUNK_ELEMENTS // (2 * self.grid.n**2))

    def at(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        _check_time(times)
        out = np.empty((times.size,) + self.shape, dtype=complex)
        for k, t in enumerate(times):
            u = inverse_ft_array(self.values * np.exp(1j * t * self.q), self.grid)
            out[k] = u[np.ix_(self.rows, self.cols)]
        return out

    stream = BoxEvaluator.stream


def make_evaluator(fhat: FrequencyField, rows=None, cols=None):
    """Choose between partial DFTs and full FFTs by estimated cost per time sample."""
    g = fhat.grid
    nx = g.n if rows is None else len(rows)
    ny = g.n if cols is None else len(cols)
    box = support_box(fhat.values)
    m1 = m2 = 1
    if box is not None:
        m1, m2 = box[1] - box[0] + 1, box[3] - box[2] + 1
    box_cost = min(nx * m1 * m2 + nx * m2 * ny, m1 * m2 * ny + nx * m1 * ny) + nx * m1 + ny * m2
    fft_cost = 5 * g.n**2 * np.log2(g.n) + 2 * g.n**2
    if box_cost <= fft_cost:
        return BoxEvaluator(fhat, rows, cols)
    return FFTEvaluator(fhat, rows, cols)


# ---------------------------------------------------------------------------
# evolution on the whole plane


class PlaneEvaluator:
    """Evolution on R^2 (no periodic images) observed on a rectangle of nodes.

    The data ``f`` is read as a function on the plane that is negligible
    outside the cell.  For small ``t`` the periodic sum coincides with the
    planar evolution on the observation window, because no periodic image
    can travel that far; past that time the Fresnel integral

        u(x, t) = (i / (4 pi t)) int e^{-i |x - y|^2 / (4 t)} f(y) dy

    is evaluated by a Riemann sum over the significant part of ``f``,
    resampled finely enough that the integrand is not aliased.

    Parameters
    ----------
    fhat : FrequencyField
    rows, cols : array of int, optional
        Observation nodes (default: the whole cell).
    source_tol : float
        Samples of ``|f|`` below ``source_tol * max|f|`` are dropped from
        the Fresnel source.
    """

    #: safety factor on the no-image travel distance
    travel_margin = 0.9
    #: fraction of the sampling rate ``2 pi / h`` the Fresnel integrand may use
    alias_margin = 0.85

    def __init__(self, fhat: FrequencyField, rows=None, cols=None, source_tol=1e-12):
        g = fhat.grid
        self.grid = g
        self.torus = make_evaluator(fhat, rows, cols)
        self.x1, self.x2 = self.torus.x1, self.torus.x2
        spec_box = support_box(fhat.values, 1e-14)
        if spec_box is None:
            self.kmax = np.zeros(2)
            self.kradial = 0.0
        else:
            xi = g.xi
            self.kmax = np.array([max(abs(xi[spec_box[0]]), abs(xi[spec_box[1]])),
                                  max(abs(xi[spec_box[2]]), abs(xi[spec_box[3]]))])
            Xi1, Xi2 = g.freq_mesh()
            sig = np.abs(fhat.values) > 1e-14 * np.abs(fhat.values).max()
            self.kradial = float(np.hypot(Xi1[sig], Xi2[sig]).max())
        f = inverse_ft_array(fhat.values, g)
        src = support_box(f, source_tol)
        if src is None:
            src = (g.n // 2, g.n // 2, g.n // 2, g.n // 2)
        pad = 2
        self.src_rows = np.arange(max(src[0] - pad, 0), min(src[1] + pad, g.n - 1) + 1)
        self.src_cols = np.arange(max(src[2] - pad, 0), min(src[3] + pad, g.n - 1) + 1)
        self.y1 = g.x[self.src_rows]
        self.y2 = g.x[self.src_cols]
        self.fhat = fhat
        # Largest per-axis separation between an observation node and a source node.
        self.dmax = np.array([
            max(abs(self.x1.max() - self.y1.min()), abs(self.x1.min() - self.y1.max())),
            max(abs(self.x2.max() - self.y2.min()), abs(self.x2.min() - self.y2.max())),
        ])
        self._sources = {}

    @property
    def t_switch(self) -> float:
        """Largest |t| served by the periodic sum."""
        if self.kradial == 0:
            return np.inf
        room = self.grid.L - self.dmax.max()
        return max(self.travel_margin * room / (2 * self.kradial), 0.0)

    def _source(self, factor: int):
        if factor not in self._sources:
            g = self.grid
            hs = g.h / factor
            y1 = self.y1[0] + hs * np.arange((self.y1.size - 1) * factor + 1)
            y2 = self.y2[0] + hs * np.arange((self.y2.size - 1) * factor + 1)
            vals = BoxEvaluator(self.fhat, x1=y1, x2=y2).at([0.0])[0]
            self._sources[factor] = (y1, y2, vals * hs * hs)
        return self._sources[factor]

    def _factor_for(self, t: float) -> int:
        need = (self.dmax / (2 * abs(t)) + self.kmax).max()
        factor = 1
        while need > self.alias_margin * TWO_PI * factor / self.grid.h:
            factor *= 2
            if factor > 64:
                raise ResourceError(f"Fresnel source would need more than 64x refinement at t={t}")
        return factor

    def fresnel(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        _check_time(times)
        out = np.empty((times.size,) + (self.x1.size, self.x2.size), dtype=complex)
        if np.any(times == 0):
            raise ValueError("the Fresnel path requires t != 0")
        factors = np.array([self._factor_for(t) for t in times])
        for fac in np.unique(factors):
            idx = np.nonzero(factors == fac)[0]
            y1, y2, F = self._source(int(fac))
            d1 = (self.x1[:, None] - y1[None, :]) ** 2
            d2 = (self.x2[:, None] - y2[None, :]) ** 2
            per_t = d1.size + d2.size + self.x1.size * max(y2.size, self.x2.size)
            step = max(1, _CHUNK_ELEMENTS // per_t)
            for s in range(0, idx.size, step):
                sel = idx[s:s + step]
                ts = times[sel]
                A1 = np.exp(-1j * d1[None] / (4 * ts[:, None, None]))
                A2 = np.exp(-1j * d2[None] / (4 * ts[:, None, None]))
                u = (A1 @ F) @ A2.transpose(0, 2, 1)
                out[sel] = u * (1j / (4 * np.pi * ts))[:, None, None]
        return out

    def at(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        near = np.abs(times) <= self.t_switch
        out = np.empty((times.size,) + (self.x1.size, self.x2.size), dtype=complex)
        if near.any():
            out[near] = self.torus.at(times[near])
        if (~near).any():
            out[~near] = self.fresnel(times[~near])
        return out

    def chunk_size(self) -> int:
        return max(1, min(self.torus.chunk_size(), 64))

    stream = BoxEvaluator.stream


# ---------------------------------------------------------------------------
# kernel


@dataclass(frozen=True)
class KernelSample:
    """One value of ``K(x, t) = int e^{i x.xi + i t|xi|^2} rho(xi) dxi``."""

    x: tuple
    t: float
    value: complex


def _radial_profile(rho: BumpProfile):
    if rho.shape == "box" or rho.center != (0.0, 0.0):
        return None
    w = rho.width if rho.kind == "smoothed-indicator" else 0.0
    if rho.shape == "ball":
        return 0.0, rho.scale[0] + w, [rho.scale[0]]
    return max(rho.scale[0] - w, 0.0), rho.scale[1] + w, [rho.scale[0], rho.scale[1]]


def _kernel_radial(r_abs, t, rho, n_nodes, breaks):
    """``2 pi int J0(r|x|) e^{i t r^2} rho(r) r dr`` by composite Gauss-Legendre."""
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    total = 0.0 + 0.0j
    for a, b in zip(breaks[:-1], breaks[1:]):
        r = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        w = 0.5 * (b - a) * weights
        prof = rho(r, np.zeros_like(r))
        total += np.sum(w * special.j0(r * r_abs) * np.exp(1j * t * r * r) * prof * r)
    return TWO_PI * total


def _kernel_cartesian(x, t, rho, n_nodes):
    R = rho.outer_extent + abs(rho.center[0]) + abs(rho.center[1])
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    xi = R * nodes
    w = R * weights
    X1, X2 = np.meshgrid(xi, xi, indexing="ij")
    W = np.outer(w, w)
    phase = x[0] * X1 + x[1] * X2 + t * (X1**2 + X2**2)
    return np.sum(W * np.exp(1j * phase) * rho(X1, X2))


def kernel_eval(x, t, rho: BumpProfile = None, rtol=1e-6, start=64, max_doublings=6) -> complex:
    """``K(x, t)`` with adaptive quadrature refinement.

    For radially symmetric profiles the angular integral is done exactly
    (Bessel ``J0``) and the radial one by composite Gauss-Legendre with
    panel breaks at the profile's non-analytic points; other profiles use a
    tensor Gauss-Legendre mesh.  The node count doubles until two successive
    values differ by less than ``rtol`` relative to the larger of ``|K|``
    and ``1e-8 int|rho|`` (below that the value is floating-point noise).

    Raises
    ------
    AccuracyError
        If ``max_doublings`` doublings do not converge; carries the last two iterates.
    """
    rho = rho if rho is not None else rho_annulus()
    _check_time(t)
    x = (float(x[0]), float(x[1]))
    radial = _radial_profile(rho)
    floor = None
    if radial is not None:
        lo, hi, inner = radial
        breaks = sorted(set([lo, *[b for b in inner if lo < b < hi], hi]))
        r_abs = float(np.hypot(*x))

        def value(n):
            return _kernel_radial(r_abs, t, rho, n, breaks)

        floor = 1e-8 * abs(_kernel_radial(0.0, 0.0, rho, 256, breaks))
    else:
        def value(n):
            return _kernel_cartesian(x, t, rho, n)

        floor = 1e-8 * abs(_kernel_cartesian((0.0, 0.0), 0.0, rho, 256))
    prev = value(start)
    n = start
    for _ in range(max_doublings):
        n *= 2
        cur = value(n)
        if abs(cur - prev) <= rtol * max(abs(cur), floor):
            return complex(cur)
        prev_prev, prev = prev, cur
    raise AccuracyError(f"kernel quadrature did not converge at x={x}, t={t}",
                        iterates=(prev_prev, prev))


def kernel_sample(x, t, rho=None) -> KernelSample:
    return KernelSample((float(x[0]), float(x[1])), float(t), kernel_eval(x, t, rho))


def kernel_decay_check(N: int, rho: BumpProfile = None, n_times=9, n_radii=48) -> dict:
    """Scan ``|K(x - y, t)|`` over ``|t| <= N^2``, ``|y - x| >= 10 N^2 + 2|t|``.

    ``K`` depends on ``x - y`` only through its length, so the scan runs over
    ``t`` and the separation ``|z| = |x - y|``, from the threshold out to twice
    the threshold.  Also records where ``|K(., t)|`` peaks for a few moderate
    times, to locate the stationary region.
    """
    rho = rho if rho is not None else rho_annulus()
    k00 = abs(kernel_eval((0.0, 0.0), 0.0, rho))
    worst = 0.0
    worst_at = None
    for t in np.linspace(-N**2, N**2, n_times):
        z0 = 10.0 * N**2 + 2 * abs(t)
        for z in np.linspace(z0, 2 * z0, n_radii):
            v = abs(kernel_eval((z, 0.0), t, rho))
            if v > worst:
                worst, worst_at = v, (float(z), float(t))
    return {
        "N": int(N),
        "K00": k00,
        "max_far": worst,
        "max_far_at": worst_at,
        "ratio": worst / k00,
        "passed": bool(worst <= 1e-6 * k00),
    }


def kernel_peak_radius(t: float, rho: BumpProfile = None, r_max_factor=3.0, n=601) -> float:
    """Separation ``|z|`` at which ``|K(z, t)|`` is largest (grid scan)."""
    rho = rho if rho is not None else rho_annulus()
    zs = np.linspace(0.0, r_max_factor * abs(t) + 10.0, n)
    vals = np.array([abs(kernel_eval((z, 0.0), t, rho)) for z in zs])
    return float(zs[np.argmax(vals)])


# ---------------------------------------------------------------------------
# symmetries


def galilean_boost(fhat: FrequencyField, lam: float) -> FrequencyField:
    """``ghat(xi) = fhat(xi + lam e_1)`` for ``lam`` a multiple of the frequency step.

    ``|e^{itDelta} g(x)| = |e^{itDelta} f(x - 2 t lam e_1)|``.
    """
    g = fhat.grid
    s = lam / g.dxi
    k = int(round(s))
    if abs(s - k) > 1e-9:
        raise ValueError(f"boost {lam} is not a multiple of the frequency step {g.dxi}")
    if k == 0:
        return FrequencyField(g, fhat.values)
    out = np.zeros_like(fhat.values)
    v = fhat.values
    # ghat[i] = fhat[i + k] along axis 0; entries shifted past the edge must vanish.
    if k > 0:
        if np.any(v[:k]):
            raise SupportError("boost moves frequency support out of the band")
        out[:-k] = v[k:]
    else:
        if np.any(v[k:]):
            raise SupportError("boost moves frequency support out of the band")
        out[-k:] = v[:k]
    return FrequencyField(g, out)


def parabolic_rescale(fhat: FrequencyField, mu: float) -> FrequencyField:
    """``ghat(xi) = fhat(mu xi)`` on the grid of period ``mu L`` and the same spacing.

    For a power of two ``mu`` the frequency nodes of the new grid are the old
    ones divided by ``mu``, so no interpolation is needed and

        e^{itDelta} g(mu x) = mu^{-2} e^{i (t/mu^2) Delta} f(x)

    holds exactly at the old nodes ``x``.
    """
    k = np.log2(mu)
    if mu <= 0 or abs(k - round(k)) > 1e-12:
        raise ValueError(f"rescale factor must be a power of two, got {mu}")
    g = fhat.grid
    n_new = int(round(g.n * mu))
    if n_new < 16:
        raise SupportError(f"rescaled grid would have only {n_new} samples per axis")
    new = GridSpec(g.L * mu, n_new)
    c_old, c_new = g.n // 2, n_new // 2
    out = np.zeros((n_new, n_new), dtype=complex)
    if n_new >= g.n:
        out[c_new - c_old:c_new - c_old + g.n, c_new - c_old:c_new - c_old + g.n] = fhat.values
    else:
        lo = c_old - c_new
        dropped = np.ones(fhat.values.shape, dtype=bool)
        dropped[lo:lo + n_new, lo:lo + n_new] = False
        if np.any(fhat.values[dropped]):
            raise SupportError("rescaled support leaves the representable band")
        out[:] = fhat.values[lo:lo + n_new, lo:lo + n_new]
    return FrequencyField(new, out)
