"""Smooth cutoffs: transition steps, smoothed indicators and band-limited windows.

A :class:`BumpProfile` is a real function on the plane, evaluated with
``profile(x1, x2)``.  The same object serves as a spatial cutoff (``chi_N``,
the time-block window) or as a frequency cutoff (``rho``, Whitney partition
functions); only the coordinates fed to it differ.

Kinds
-----
``smoothed-indicator``
    1 on a core (box, ball or annulus), 0 beyond the core dilated by
    ``width``, with a C^infinity monotone transition in between.
``raw-indicator``
    The sharp indicator of the core (boundary inclusive).
``tensor-fejer``
    Product of 1D Fejer kernels whose Fourier transform is the triangle
    ``max(0, 1 - 2|xi_i| scale_i)`` up to normalization; integer translates
    (in units of ``scale``) sum to one.
``vallee-poussin``
    Product of 1D de la Vallee-Poussin kernels: Fourier transform flat on
    ``|xi_i| <= 1/scale_i`` and vanishing for ``|xi_i| >= 2/scale_i``;
    translates by ``scale`` also sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli, comb, factorial, polygamma, sici

from .errors import MaxwaveError
from .grid import TWO_PI, FrequencyField, GridSpec, SpatialField

KINDS = ("smoothed-indicator", "raw-indicator", "tensor-fejer", "vallee-poussin")
SHAPES = ("box", "ball", "annulus")


def _g(u):
    out = np.zeros_like(u, dtype=float)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(s):
    """C^infinity step: 1 for ``s <= 0``, 0 for ``s >= 1``, monotone between."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    a = _g(1.0 - s)
    b = _g(s)
    return a / (a + b)


def compact_bump(s):
    """``exp(1 - 1/(1 - s^2))`` for ``|s| < 1``, zero elsewhere; equals 1 at 0.

    Smooth as a function of ``s^2``, hence as a radial profile.
    """
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def fejer_1d(u):
    """``(1/(4 pi)) (sin(u/4)/(u/4))^2``: Fourier support in ``[-1/2, 1/2]``, unit integer-translate sum."""
    return np.sinc(np.asarray(u, dtype=float) / (4 * np.pi)) ** 2 / (4 * np.pi)


def fejer_1d_hat(xi):
    return np.maximum(0.0, 1.0 - 2.0 * np.abs(xi)) / TWO_PI


def vallee_poussin_1d(u):
    """Kernel whose transform is flat on ``|xi| <= 1`` and zero for ``|xi| >= 2``.

    Integer translates sum to one because the transform vanishes at every
    nonzero multiple of ``2 pi``.
    """
    u = np.asarray(u, dtype=float)
    # Difference of two triangle transforms: 2*tri(xi/2) - tri(xi).
    return (2 * 2 * np.sinc(u / np.pi) ** 2 - np.sinc(u / (2 * np.pi)) ** 2) / TWO_PI


def vallee_poussin_1d_hat(xi):
    a = np.abs(np.asarray(xi, dtype=float))
    return np.clip(2.0 - a, 0.0, 1.0) / TWO_PI


# Both 1D windows are (A - sum_i b_i cos(c_i u)) / u^2: (A, ((b_i, c_i), ...)).
_COSINE_FORMS = {
    "fejer": (2 / np.pi, ((2 / np.pi, 0.5),)),
    "vallee-poussin": (0.0, ((-1 / np.pi, 1.0), (1 / np.pi, 2.0))),
}
_KERNELS_1D = {"fejer": fejer_1d, "vallee-poussin": vallee_poussin_1d}


def _cos_tail(a, c, terms=8):
    """``sum_{m >= 0} cos(c (a + m)) / (a + m)^2`` for ``a`` large, by Euler-Maclaurin."""
    si, _ = sici(c * a)
    total = np.cos(c * a) / a - c * (np.pi / 2 - si)
    total = total + 0.5 * np.cos(c * a) / a**2
    B = bernoulli(2 * terms)
    for j in range(1, terms + 1):
        n = 2 * j - 1
        # n-th derivative of e^{icu} u^{-2}, real part.
        d = sum(comb(n, r) * (1j * c) ** (n - r) * (-1) ** r * factorial(r + 1) * a ** (-2.0 - r)
                for r in range(n + 1))
        total = total - B[2 * j] / factorial(2 * j) * np.real(d * np.exp(1j * c * a))
    return total


def translate_sum(kind: str, x, K: int = 200):
    """``sum_{k in Z} eta(x - k)`` for a 1D window ``eta`` (``fejer`` or ``vallee-poussin``).

    Terms with ``|k| <= K`` are summed directly; the two tails are evaluated
    in closed form (trigamma for the ``1/u^2`` part, sine integral plus
    Euler-Maclaurin corrections for the oscillating part).  The sum is
    1-periodic, so ``x`` is first reduced to ``[-1/2, 1/2]``.
    """
    if kind not in _COSINE_FORMS:
        raise ValueError(f"kind must be one of {sorted(_COSINE_FORMS)}, got {kind!r}")
    x = np.asarray(x, dtype=float)
    x = x - np.round(x)
    k = np.arange(-K, K + 1)
    direct = _KERNELS_1D[kind](x[..., None] - k).sum(axis=-1)
    A, cosines = _COSINE_FORMS[kind]
    # Right tail: u = k - x for k > K (cosine is even); left tail: u = x - k for k < -K.
    a_right, a_left = K + 1 - x, K + 1 + x
    tail = A * (polygamma(1, a_right) + polygamma(1, a_left))
    for b, c in cosines:
        tail = tail - b * (_cos_tail(a_right, c) + _cos_tail(a_left, c))
    return direct + tail


@dataclass(frozen=True)
class BumpProfile:
    """A smooth (or sharp) cutoff on the plane.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    center : tuple of float
    scale : tuple of float
        Core half-extents for ``box``; ``(radius, radius)`` for ``ball``;
        ``(r_in, r_out)`` for ``annulus``; lattice spacing for the windows.
    width : float
        Transition width of a smoothed indicator.  Must not exceed half the
        core scale, so the profile vanishes outside the 1.5-dilate.
    shape : str
        Core geometry for indicator kinds.
    """

    kind: str
    center: tuple = (0.0, 0.0)
    scale: tuple = (1.0, 1.0)
    width: float = 0.0
    shape: str = "box"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bump kind {self.kind!r}")
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "scale", tuple(float(c) for c in self.scale))
        if self.shape == "annulus":
            if not 0 <= self.scale[0] < self.scale[1]:
                raise ValueError(f"annulus radii must satisfy 0 <= r_in < r_out, got {self.scale}")
        elif min(self.scale) <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.kind == "smoothed-indicator":
            core = self.scale[1] if self.shape == "annulus" else min(self.scale)
            if not 0 < self.width <= 0.5 * core:
                raise ValueError(f"transition width {self.width} must lie in (0, {0.5 * core}]")

    # ------------------------------------------------------------------
    def _excess(self, x1, x2):
        """Per-axis (box) or radial distance past the core, zero inside."""
        d1 = x1 - self.center[0]
        d2 = x2 - self.center[1]
        if self.shape == "box":
            return (np.maximum(np.abs(d1) - self.scale[0], 0.0),
                    np.maximum(np.abs(d2) - self.scale[1], 0.0))
        r = np.hypot(d1, d2)
        if self.shape == "ball":
            return (np.maximum(r - self.scale[0], 0.0),)
        return (np.maximum(np.maximum(self.scale[0] - r, r - self.scale[1]), 0.0),)

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.kind == "smoothed-indicator":
            out = 1.0
            for e in self._excess(x1, x2):
                out = out * smooth_step(e / self.width)
            return np.broadcast_to(out, np.broadcast(x1, x2).shape).astype(float)
        if self.kind == "raw-indicator":
            inside = np.ones(np.broadcast(x1, x2).shape, dtype=bool)
            for e in self._excess(x1, x2):
                inside &= e <= 0
            return inside.astype(float)
        u1 = (x1 - self.center[0]) / self.scale[0]
        u2 = (x2 - self.center[1]) / self.scale[1]
        if self.kind == "tensor-fejer":
            return fejer_1d(u1) * fejer_1d(u2)
        return vallee_poussin_1d(u1) * vallee_poussin_1d(u2)

    def fourier(self, xi1, xi2):
        """Closed-form Fourier transform (package convention) of a window kind."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        s1, s2 = self.scale
        phase = np.exp(-1j * (xi1 * self.center[0] + xi2 * self.center[1]))
        if self.kind == "tensor-fejer":
            amp = fejer_1d_hat(xi1 * s1) * fejer_1d_hat(xi2 * s2)
        elif self.kind == "vallee-poussin":
            amp = vallee_poussin_1d_hat(xi1 * s1) * vallee_poussin_1d_hat(xi2 * s2)
        else:
            raise MaxwaveError(f"no closed-form transform for kind {self.kind!r}")
        return amp * s1 * s2 * phase

    @property
    def frequency_extent(self) -> tuple:
        """Per-axis half-width of the Fourier support of a window kind."""
        if self.kind == "tensor-fejer":
            return (0.5 / self.scale[0], 0.5 / self.scale[1])
        if self.kind == "vallee-poussin":
            return (2.0 / self.scale[0], 2.0 / self.scale[1])
        raise MaxwaveError(f"kind {self.kind!r} is not band-limited")

    @property
    def outer_extent(self) -> float:
        """Radius (max-norm for boxes) beyond which an indicator kind vanishes."""
        w = self.width if self.kind == "smoothed-indicator" else 0.0
        if self.shape == "box":
            return max(self.scale) + w
        return self.scale[-1] + w


def build_bump(kind, center=(0.0, 0.0), scale=(1.0, 1.0), width=None, shape="box"):
    """Construct a :class:`BumpProfile`; ``width`` defaults to a quarter of the core scale."""
    if np.isscalar(scale):
        scale = (float(scale), float(scale))
    if width is None:
        if kind == "smoothed-indicator":
            core = scale[1] if shape == "annulus" else min(scale)
            width = 0.25 * core
            if shape == "annulus":
                width = min(width, 0.5 * (scale[1] - scale[0]))
        else:
            width = 0.0
    return BumpProfile(kind, tuple(center), tuple(scale), float(width), shape)


def sample_bump(profile: BumpProfile, grid: GridSpec, domain: str = "space"):
    """Sample ``profile`` on the spatial nodes (``domain='space'``) or frequency nodes."""
    if domain == "space":
        X1, X2 = grid.mesh()
        return SpatialField(grid, profile(X1, X2))
    if domain == "frequency":
        Xi1, Xi2 = grid.freq_mesh()
        return FrequencyField(grid, profile(Xi1, Xi2))
    raise ValueError(f"domain must be 'space' or 'frequency', got {domain!r}")


def chi_N(N: float) -> BumpProfile:
    """Spatial cutoff equal to 1 on ``|y| <= 4N`` and 0 on ``|y| >= 6N``."""
    return BumpProfile("smoothed-indicator", (0.0, 0.0), (4.0 * N, 4.0 * N), 2.0 * N, "ball")


def rho_annulus() -> BumpProfile:
    """Frequency cutoff equal to 1 on ``1/2 <= |xi| <= 1`` and 0 outside ``0.4 <= |xi| <= 1.1``."""
    return BumpProfile("smoothed-indicator", (0.0, 0.0), (0.5, 1.0), 0.1, "annulus")
