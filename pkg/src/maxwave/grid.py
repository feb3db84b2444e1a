"""Periodic grids, field containers and the Fourier convention.

Every function in the package uses the convention

    f(x) = \\int \\hat f(\\xi) e^{i x \\cdot \\xi} d\\xi,
    \\hat f(\\xi) = (2\\pi)^{-2} \\int f(x) e^{-i x \\cdot \\xi} dx,

discretized on the square cell [-L/2, L/2)^2 with n samples per axis.  Both
spatial and frequency arrays are stored in *centered* order: index ``i``
along an axis is the node ``x = -L/2 + i h`` (resp. ``xi = (i - n/2) dxi``),
so the origin sits at index ``n // 2``.  Axis 0 is the first coordinate.

With this convention Plancherel reads

    sum |f|^2 h^2 = (2 pi)^2 sum |fhat|^2 dxi^2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, GridMismatchError, SupportError

TWO_PI = 2.0 * np.pi

SUPPORTED_SCALES = tuple(2**k for k in range(3, 9))


@dataclass(frozen=True)
class GridSpec:
    """Square periodic grid of side ``L`` with ``n`` nodes per axis."""

    L: float
    n: int

    def __post_init__(self):
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"period must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValueError(f"samples per axis must be an even integer >= 16, got {self.n}")
        # The unit annulus must sit strictly inside the band.
        if self.nyquist <= 1.0:
            raise ValueError(
                f"band edge {self.nyquist:.4f} does not contain the annulus |xi| <= 1")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def dxi(self) -> float:
        return TWO_PI / self.L

    @property
    def nyquist(self) -> float:
        """Largest representable frequency magnitude along one axis."""
        return np.pi * self.n / self.L

    @property
    def x(self) -> np.ndarray:
        return -self.L / 2 + self.h * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        return self.dxi * (np.arange(self.n) - self.n // 2)

    def mesh(self):
        """Spatial coordinate arrays ``(X1, X2)`` of shape (n, n)."""
        return np.meshgrid(self.x, self.x, indexing="ij")

    def freq_mesh(self):
        return np.meshgrid(self.xi, self.xi, indexing="ij")

    def index_of(self, x: float) -> int:
        """Index of the node at coordinate ``x`` (must be on the grid)."""
        k = (x + self.L / 2) / self.h
        ik = int(round(k))
        if abs(k - ik) > 1e-9 or not 0 <= ik < self.n:
            raise DomainError(f"coordinate {x} is not a grid node")
        return ik


def make_grid(N: int) -> GridSpec:
    """Standard grid for scale ``N``: period 16N, n the smallest power of two >= 8N.

    >>> make_grid(8)
    GridSpec(L=128.0, n=64)
    """
    if N not in SUPPORTED_SCALES:
        raise ValueError(f"scale must be one of {SUPPORTED_SCALES}, got {N}")
    n = 1 << int(np.ceil(np.log2(8 * N)))
    return GridSpec(L=16.0 * N, n=n)


# ---------------------------------------------------------------------------
# frequency regions used as support tags


@dataclass(frozen=True)
class Annulus:
    """Closed frequency annulus ``r_in <= |xi| <= r_out``."""

    r_in: float
    r_out: float
    tag: str = "annulus"

    def mask(self, xi1, xi2, dilate: float = 0.0):
        r = np.hypot(xi1, xi2)
        return (r >= self.r_in - dilate) & (r <= self.r_out + dilate)

    @property
    def extent(self) -> float:
        return self.r_out

    def to_json(self):
        return {"tag": self.tag, "r_in": self.r_in, "r_out": self.r_out}


@dataclass(frozen=True)
class Box:
    """Closed axis-parallel frequency box ``|xi_i - c_i| <= a_i``."""

    center: tuple
    half_widths: tuple
    tag: str = "box"

    def mask(self, xi1, xi2, dilate: float = 0.0):
        return ((np.abs(xi1 - self.center[0]) <= self.half_widths[0] + dilate)
                & (np.abs(xi2 - self.center[1]) <= self.half_widths[1] + dilate))

    @property
    def extent(self) -> float:
        return max(abs(self.center[0]) + self.half_widths[0],
                   abs(self.center[1]) + self.half_widths[1])

    def to_json(self):
        return {"tag": self.tag, "center": list(self.center),
                "half_widths": list(self.half_widths)}


UNIT_ANNULUS = Annulus(0.5, 1.0, tag="A(1)")

Region = Union[Annulus, Box]


def region_from_json(d):
    if d is None:
        return None
    if "r_in" in d:
        return Annulus(d["r_in"], d["r_out"], tag=d.get("tag", "annulus"))
    return Box(tuple(d["center"]), tuple(d["half_widths"]), tag=d.get("tag", "box"))


# ---------------------------------------------------------------------------
# fields


def _frozen(values, grid):
    arr = np.array(values, dtype=np.complex128, copy=True)
    if arr.shape != (grid.n, grid.n):
        raise GridMismatchError(f"expected shape {(grid.n, grid.n)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field values must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SpatialField:
    """Complex samples ``f(x)`` on the nodes of ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid))

    def norm(self) -> float:
        """Riemann-sum L^2 norm over the whole cell."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.grid.h)

    def __mul__(self, c):
        return SpatialField(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class FrequencyField:
    """Samples of ``fhat(xi)`` on the frequency nodes of ``grid``.

    ``declared_support`` is an optional :class:`Annulus` or :class:`Box`; when
    set, all but ``1e-10`` of the squared mass must lie inside it after
    dilation by two frequency steps.
    """

    grid: GridSpec
    values: np.ndarray
    declared_support: Optional[Region] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid))
        if self.declared_support is not None:
            frac = self.mass_outside(self.declared_support, 2 * self.grid.dxi)
            if frac > 1e-10:
                raise SupportError(
                    f"{frac:.3e} of the squared mass lies outside {self.declared_support}")

    def mass_outside(self, region: Region, dilate: float = 0.0) -> float:
        p = np.abs(self.values) ** 2
        total = p.sum()
        if total == 0:
            return 0.0
        xi1, xi2 = self.grid.freq_mesh()
        return float(p[~region.mask(xi1, xi2, dilate)].sum() / total)

    def norm(self) -> float:
        """L^2 norm of the spatial function, via Plancherel."""
        return float(TWO_PI * np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.grid.dxi)

    def support_extent(self) -> float:
        """Largest |xi_i| over nodes carrying nonzero amplitude (0 for the zero field)."""
        nz = np.nonzero(self.values)
        if nz[0].size == 0:
            return 0.0
        xi = self.grid.xi
        return float(max(np.abs(xi[nz[0]]).max(), np.abs(xi[nz[1]]).max()))

    def with_values(self, values, declared_support=None) -> "FrequencyField":
        return FrequencyField(self.grid, values, declared_support)

    def __mul__(self, c):
        return FrequencyField(self.grid, self.values * c, self.declared_support)

    __rmul__ = __mul__

    def __add__(self, other):
        check_same_grid(self, other)
        return FrequencyField(self.grid, self.values + other.values)


def check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def forward_ft(f: SpatialField) -> FrequencyField:
    """Fourier transform under the package convention."""
    g = f.grid
    vals = sfft.fftshift(sfft.fft2(sfft.ifftshift(f.values)))
    return FrequencyField(g, vals * (g.h / TWO_PI) ** 2)


def inverse_ft(fhat: FrequencyField) -> SpatialField:
    g = fhat.grid
    vals = sfft.fftshift(sfft.ifft2(sfft.ifftshift(fhat.values)))
    return SpatialField(g, vals * (g.dxi * g.n) ** 2)


def inverse_ft_array(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Array version of :func:`inverse_ft` for hot loops (no validation)."""
    return sfft.fftshift(sfft.ifft2(sfft.ifftshift(values))) * (grid.dxi * grid.n) ** 2


# ---------------------------------------------------------------------------
# spatial norms


def ball_mask(grid: GridSpec, center, radius: float) -> np.ndarray:
    """Nodes ``x`` with ``|x - center| <= radius`` (boundary inclusive)."""
    check_ball(grid, center, radius)
    X1, X2 = grid.mesh()
    return np.hypot(X1 - center[0], X2 - center[1]) <= radius * (1 + 1e-12)


def check_ball(grid: GridSpec, center, radius: float):
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    lim = grid.L / 2
    if max(abs(center[0]), abs(center[1])) + radius > lim:
        raise DomainError(
            f"ball B({tuple(center)}, {radius}) exceeds the periodic cell [-{lim}, {lim})^2")


def restricted_l2_norm(f: SpatialField, center=(0.0, 0.0), radius: float = 1.0) -> float:
    """Midpoint Riemann sum ``(sum_{x in ball} |f(x)|^2 h^2)^{1/2}``."""
    mask = ball_mask(f.grid, center, radius)
    return float(np.sqrt(np.sum(np.abs(f.values[mask]) ** 2)) * f.grid.h)


# ---------------------------------------------------------------------------
# spacetime regions


@dataclass(frozen=True)
class SpacetimeRegion:
    """A ball (or the whole cell, ``radius=None``) times a sampled time interval.

    Time samples are ``t0, t0 + dt, ...`` up to and including ``t1`` (the last
    step is shortened when ``t1 - t0`` is not a multiple of ``dt``).
    """

    t0: float
    t1: float
    dt: float = 0.125
    radius: Optional[float] = None
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")
        if not self.t0 <= self.t1:
            raise ValueError(f"empty time range [{self.t0}, {self.t1}]")
        if not 0 < self.dt <= 0.25:
            raise ValueError(f"time step must lie in (0, 1/4], got {self.dt}")

    @property
    def times(self) -> np.ndarray:
        k = int(np.floor((self.t1 - self.t0) / self.dt + 1e-9))
        ts = self.t0 + self.dt * np.arange(k + 1)
        if self.t1 - ts[-1] > 1e-9 * max(1.0, abs(self.t1)):
            ts = np.append(ts, self.t1)
        return ts

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights matching :attr:`times`."""
        ts = self.times
        if ts.size == 1:
            return np.ones(1) * self.dt
        gaps = np.diff(ts)
        w = np.empty_like(ts)
        w[0] = gaps[0] / 2
        w[-1] = gaps[-1] / 2
        w[1:-1] = (gaps[:-1] + gaps[1:]) / 2
        return w

    def refined(self) -> "SpacetimeRegion":
        return SpacetimeRegion(self.t0, self.t1, self.dt / 2, self.radius, self.center)

    def with_dt(self, dt: float) -> "SpacetimeRegion":
        return SpacetimeRegion(self.t0, self.t1, dt, self.radius, self.center)


def Q_box(N: float, dt: float = 0.125) -> SpacetimeRegion:
    """``B(0, N) x [N/2, N]``."""
    return SpacetimeRegion(N / 2, N, dt, radius=N)


# ---------------------------------------------------------------------------
# serialization


def save_field(field_, path) -> tuple:
    """Write ``<path>.json`` (header) and ``<path>.bin`` (row-major complex128).

    Returns the two paths written.
    """
    path = Path(path)
    kind = "frequency" if isinstance(field_, FrequencyField) else "spatial"
    support = getattr(field_, "declared_support", None)
    header = {
        "kind": kind,
        "L": field_.grid.L,
        "n": field_.grid.n,
        "dtype": "complex128",
        "layout": "row-major, axis 0 = first coordinate, centered (origin at index n//2)",
        "support": support.to_json() if support is not None else None,
    }
    hpath, bpath = path.with_suffix(".json"), path.with_suffix(".bin")
    hpath.write_text(json.dumps(header, indent=2, sort_keys=True))
    np.ascontiguousarray(field_.values, dtype="<c16").tofile(bpath)
    return hpath, bpath


def load_field(path):
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    grid = GridSpec(float(header["L"]), int(header["n"]))
    vals = np.fromfile(path.with_suffix(".bin"), dtype="<c16")
    if vals.size != grid.n**2:
        raise GridMismatchError(f"binary payload has {vals.size} entries, expected {grid.n**2}")
    vals = vals.reshape(grid.n, grid.n)
    if header["kind"] == "frequency":
        return FrequencyField(grid, vals, region_from_json(header.get("support")))
    return SpatialField(grid, vals)
