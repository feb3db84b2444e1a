"""Whitney decomposition of frequency pairs in the annulus.

Cubes at scale ``j <= 0`` are ``2^j (k + [0, 1)^2)`` inside the bounding
square ``[-1, 1]^2`` of the annulus; a point on the top or right edge of the
square is assigned to the last cube in that row or column.  Two cubes of the
same scale are *close* when they coincide or share an edge, and a pair is
*Whitney-related* when the cubes are not close but their parents are.  The
four unit cubes have the whole square as common parent.

Refining close pairs scale by scale splits the product of two sums over
unit cubes into Whitney-related pairs at every scale down to ``j_min``, plus
the close pairs left at ``j_min``::

    F^2 = sum_{j_min <= j <= 0} sum_{k ~ k'} F^j_k F^j_k' + sum_{close at j_min} F_k F_k'.

This is an identity, not an approximation, once the partition functions are
nested (each coarse function is the sum of its children).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bumps import smooth_step
from .errors import DepthError
from .grid import FrequencyField, GridSpec, inverse_ft_array
from .propagator import evolve

J_FLOOR = -8


@dataclass(frozen=True, order=True)
class WhitneyCube:
    """The dyadic cube ``2^j (k + [0,1)^2)``; ``j = 1`` denotes the root square."""

    j: int
    k: tuple

    @property
    def side(self) -> float:
        return 2.0**self.j

    @property
    def lo(self) -> np.ndarray:
        return self.side * np.asarray(self.k, dtype=float)

    @property
    def center(self) -> np.ndarray:
        return self.lo + 0.5 * self.side

    @property
    def parent(self) -> "WhitneyCube":
        if self.j >= 0:
            return ROOT
        return WhitneyCube(self.j + 1, (self.k[0] // 2, self.k[1] // 2))

    def children(self):
        if self is ROOT or self.j == 1:
            return [WhitneyCube(0, (a, b)) for a in (-1, 0) for b in (-1, 0)]
        j = self.j - 1
        return [WhitneyCube(j, (2 * self.k[0] + a, 2 * self.k[1] + b)) for a in (0, 1) for b in (0, 1)]

    def contains(self, xi) -> bool:
        return cube_of(xi, self.j) == self

    def distance(self, other: "WhitneyCube") -> float:
        """Euclidean distance between the closed cubes."""
        gap = np.maximum(0.0, np.maximum(self.lo - (other.lo + other.side),
                                         other.lo - (self.lo + self.side)))
        return float(np.hypot(*gap))

    def norm_range(self):
        """Smallest and largest ``|xi|`` over the closed cube."""
        lo, hi = self.lo, self.lo + self.side
        near = np.clip(0.0, lo, hi)
        far = np.where(np.abs(lo) > np.abs(hi), lo, hi)
        return float(np.hypot(*near)), float(np.hypot(*far))


ROOT = WhitneyCube(1, (-1, -1))


def cube_of(xi, j: int) -> WhitneyCube:
    """The scale-``j`` cube containing ``xi`` (top/right edge of the square folded in)."""
    m = 2 ** (-j)
    k = np.floor(np.asarray(xi, dtype=float) / 2.0**j).astype(int)
    k = np.clip(k, -m, m - 1)
    return WhitneyCube(j, (int(k[0]), int(k[1])))


def close(a: WhitneyCube, b: WhitneyCube) -> bool:
    """Same cube, or cubes sharing an edge (the root is close to itself)."""
    if a.j != b.j:
        raise ValueError("closeness compares cubes of one scale")
    return abs(a.k[0] - b.k[0]) + abs(a.k[1] - b.k[1]) <= 1


def related(a: WhitneyCube, b: WhitneyCube) -> bool:
    """Whitney relation: not close, but with close parents."""
    return (not close(a, b)) and close(a.parent, b.parent)


def intersects_annulus(c: WhitneyCube, r_in=0.5, r_out=1.0) -> bool:
    lo, hi = c.norm_range()
    return lo <= r_out and hi >= r_in


def decompose_annulus(j_min: int, r_in=0.5, r_out=1.0) -> dict:
    """Cubes meeting the closed annulus, for each scale ``j_min <= j <= 0``."""
    if not J_FLOOR <= j_min <= 0:
        raise ValueError(f"j_min must lie in [{J_FLOOR}, 0], got {j_min}")
    out = {}
    for j in range(0, j_min - 1, -1):
        m = 2 ** (-j)
        cubes = [WhitneyCube(j, (a, b)) for a in range(-m, m) for b in range(-m, m)]
        out[j] = [c for c in cubes if intersects_annulus(c, r_in, r_out)]
    return out


def whitney_pairs(j: int, cubes=None) -> list:
    """Ordered Whitney-related pairs among the kept cubes of scale ``j``."""
    if cubes is None:
        cubes = decompose_annulus(min(j, 0))[j]
    index = {c.k: c for c in cubes}
    pairs = []
    for c in cubes:
        for d in _candidates(c):
            if d.k in index and related(c, d):
                pairs.append((c, index[d.k]))
    return pairs


def _candidates(c: WhitneyCube):
    """Cubes whose parents could be close to ``c``'s parent."""
    if c.j == 0:
        return [WhitneyCube(0, (a, b)) for a in (-1, 0) for b in (-1, 0)]
    out = []
    for da in range(-3, 4):
        for db in range(-3, 4):
            out.append(WhitneyCube(c.j, (c.k[0] + da, c.k[1] + db)))
    return out


def partner_counts(j: int, cubes=None) -> dict:
    """Number of Whitney partners of each kept cube at scale ``j``."""
    if cubes is None:
        cubes = decompose_annulus(min(j, 0))[j]
    counts = {c: 0 for c in cubes}
    for a, _ in whitney_pairs(j, cubes):
        counts[a] += 1
    return counts


def default_j_min(grid: GridSpec) -> int:
    """``max(-8, floor(log2 dxi))``: the first dyadic side at or below the frequency step."""
    return max(J_FLOOR, int(np.floor(np.log2(grid.dxi))))


def pair_coverage_check(xi, xi2, j_min: int):
    """Scale and cubes ``(j, cube, cube')`` of the Whitney pair covering ``(xi, xi2)``.

    Pairs separated by more than ``4 * 2^{j_min}`` are always covered.

    Raises
    ------
    DepthError
        If the two points are still in close cubes at ``j_min``.
    """
    xi = np.asarray(xi, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    for j in range(0, j_min - 1, -1):
        a, b = cube_of(xi, j), cube_of(xi2, j)
        if not close(a, b):
            return j, a, b
    raise DepthError(f"points {xi.tolist()} and {xi2.tolist()} are not separated down to 2^{j_min}")


def coverage_multiplicity(xi, xi2, j_min: int) -> int:
    """Number of (scale, related pair) entries of the family containing ``(xi, xi2)``."""
    count = 0
    for j in range(0, j_min - 1, -1):
        if related(cube_of(xi, j), cube_of(xi2, j)):
            count += 1
    return count


class WhitneyPartition:
    """Nested smooth partition of unity ``phi^j_k`` sampled on a frequency grid.

    At ``j_min`` each kept cube carries a smoothed indicator of the closed
    cube with transition width ``2^{j_min}/8``; dividing by their sum makes
    them an exact partition wherever the sum is positive, which includes a
    neighbourhood of the annulus.  Coarser functions are sums of children.
    """

    def __init__(self, grid: GridSpec, j_min: int = None, r_in=0.5, r_out=1.0):
        self.grid = grid
        self.j_min = default_j_min(grid) if j_min is None else int(j_min)
        self.cubes = decompose_annulus(self.j_min, r_in, r_out)
        xi = grid.xi
        side = 2.0**self.j_min
        width = side / 8.0
        raw = {}
        for c in self.cubes[self.j_min]:
            lo = c.lo
            r1 = _profile_1d(xi, lo[0], lo[0] + side, width)
            r2 = _profile_1d(xi, lo[1], lo[1] + side, width)
            if r1.any() and r2.any():
                raw[c] = np.outer(r1, r2)
        total = sum(raw.values()) if raw else np.zeros((grid.n, grid.n))
        self.covered = total > 0
        safe = np.where(self.covered, total, 1.0)
        self.phi = {self.j_min: {c: v / safe for c, v in raw.items()}}
        for j in range(self.j_min + 1, 1):
            level = {}
            for c, v in self.phi[j - 1].items():
                p = c.parent
                level[p] = level[p] + v if p in level else v.copy()
            self.phi[j] = level

    def pieces(self, fhat: FrequencyField, j: int) -> dict:
        """``{cube: fhat * phi^j_cube}`` for every cube carrying mass at scale ``j``."""
        if fhat.grid != self.grid:
            raise ValueError("partition was built on another grid")
        v = fhat.values
        return {c: FrequencyField(self.grid, v * p) for c, p in self.phi[j].items()}

    def masses(self, fhat: FrequencyField, j: int) -> dict:
        """Partition-weighted squared mass ``sum phi |fhat|^2`` per cube (additive in ``k``)."""
        p2 = np.abs(fhat.values) ** 2
        return {c: float(np.sum(p * p2)) for c, p in self.phi[j].items()}


def _profile_1d(xi, a, b, width):
    """Smoothed indicator of ``[a, b]`` with transition width ``width`` outside it."""
    d = np.maximum(a - xi, xi - b)
    return smooth_step(d / width) * (d < width)


def frequency_piece(fhat: FrequencyField, cube: WhitneyCube, partition: WhitneyPartition) -> FrequencyField:
    """``fhat * phi^j_k`` (zero if the cube carries no partition function)."""
    p = partition.phi.get(cube.j, {}).get(cube)
    if p is None:
        return FrequencyField(fhat.grid, np.zeros_like(fhat.values))
    return FrequencyField(fhat.grid, fhat.values * p)


@dataclass
class ProductIdentityReport:
    t: float
    j_min: int
    max_abs_error: float
    relative_error: float
    remainder_l2_fraction: float
    remainder_pair_mass_fraction: float
    pairs_per_scale: dict


def product_identity(fhat: FrequencyField, t: float, partition: WhitneyPartition) -> ProductIdentityReport:
    """Compare ``(e^{itDelta} f)^2`` with its Whitney expansion at time ``t``.

    Reports the identity error, and the size of the close-pair remainder at
    ``j_min`` both as an L^2 fraction of ``F^2`` and as a fraction of the
    partition-weighted pair mass ``(sum_k m_k)^2``.
    """
    g = fhat.grid
    F = evolve(fhat, t).values
    lhs = F * F
    Xi1, Xi2 = g.freq_mesh()
    mult = np.exp(1j * t * (Xi1**2 + Xi2**2)) * fhat.values

    def fields(j):
        return {c: inverse_ft_array(mult * p, g) for c, p in partition.phi[j].items()}

    rhs = np.zeros_like(lhs)
    pairs_per_scale = {}
    for j in range(0, partition.j_min - 1, -1):
        U = fields(j)
        n_pairs = 0
        for c, u in U.items():
            acc = np.zeros_like(lhs)
            for d in _candidates(c):
                if d in U and related(c, d):
                    acc += U[d]
                    n_pairs += 1
            rhs += u * acc
        pairs_per_scale[j] = n_pairs
    U = fields(partition.j_min)
    rem = np.zeros_like(lhs)
    for c, u in U.items():
        acc = np.zeros_like(lhs)
        for da, db in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            d = WhitneyCube(c.j, (c.k[0] + da, c.k[1] + db))
            if d in U:
                acc += U[d]
        rem += u * acc
    err = np.abs(lhs - (rhs + rem))
    scale = np.sqrt(np.sum(np.abs(lhs) ** 2))
    m = partition.masses(fhat, partition.j_min)
    total = sum(m.values())
    close_mass = 0.0
    for c, mc in m.items():
        for da, db in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            d = WhitneyCube(c.j, (c.k[0] + da, c.k[1] + db))
            close_mass += mc * m.get(d, 0.0)
    return ProductIdentityReport(
        t=float(t),
        j_min=partition.j_min,
        max_abs_error=float(err.max()),
        relative_error=float(np.sqrt(np.sum(err**2)) / scale) if scale > 0 else 0.0,
        remainder_l2_fraction=float(np.sqrt(np.sum(np.abs(rem) ** 2)) / scale) if scale > 0 else 0.0,
        remainder_pair_mass_fraction=close_mass / total**2 if total > 0 else 0.0,
        pairs_per_scale=pairs_per_scale,
    )
