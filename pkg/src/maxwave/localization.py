"""Localization in time and space of the maximal estimate.

Two groups of tools live here.

*Time blocks.*  The interval ``[0, N^2]`` is cut into ``I_j = [t_j - N, t_j]``
with ``t_j = jN``.  On each block the evolution near the origin is carried
by ``f_j = W(y) e^{i t_j Delta} f(y)``, where ``W`` is a wide window equal to
1 on ``B(0, 4N)``: a solution with frequencies in the unit annulus moves at
speed at most about 2, so during ``I_j`` the part of ``e^{i t_j Delta} f``
outside the window cannot reach ``B(0, N)``.  Multiplying by ``W`` spreads
the frequency support by ``O(1/N)``; the pieces are truncated back to
``1/2 - 8/N <= |xi| <= 1 + 8/N`` and the lost mass is reported.  This part
runs on the plane (no periodic images), on the grid :func:`time_block_grid`.

*Ratio experiments.*  Long-time against short-time maximal norms, wide
against narrow balls, and local against global norms, all on the periodic
cell of :func:`~maxwave.grid.make_grid`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j1

from .errors import AccuracyError, UndefinedRatioError
from .grid import (Annulus, FrequencyField, GridSpec, SpacetimeRegion, SpatialField,
                   forward_ft, inverse_ft_array)
from .norms import ball_mask_on, ball_rows_cols, maximal_function
from .propagator import BoxEvaluator, PlaneEvaluator, make_evaluator

#: allowed loss of squared mass when truncating a piece back to the annulus
TRUNCATION_TOL = 1e-6
#: frequency dilation of the pieces, in units of 1/N
SUPPORT_DILATION = 8.0


def time_block_grid(N: int) -> GridSpec:
    """Cell of side 32N with spacing 2: room for the window (radius about 9N)."""
    return GridSpec(32.0 * N, 16 * N)


@dataclass(frozen=True)
class BlockWindow:
    """Indicator of ``B(0, radius)`` convolved with a Gaussian of deviation ``sigma``.

    Takes values in ``[0, 1]``; equals 1 up to ``4e-7`` on ``B(0, radius - 5 sigma)``.
    """

    radius: float
    sigma: float

    @classmethod
    def for_scale(cls, N: float, plateau: float = None) -> "BlockWindow":
        """Window flat on ``B(0, plateau)`` (default ``4N``) with ``sigma = N/2``."""
        sigma = N / 2.0
        plateau = 4.0 * N if plateau is None else plateau
        return cls(plateau + 5 * sigma, sigma)

    @property
    def plateau(self) -> float:
        return self.radius - 5 * self.sigma

    def fourier(self, xi1, xi2):
        r = np.hypot(xi1, xi2)
        R = self.radius
        safe = np.where(r > 0, r, 1.0)
        disk = np.where(r > 0, R * j1(R * safe) / (2 * np.pi * safe), R * R / (4 * np.pi))
        return disk * np.exp(-0.5 * (self.sigma * r) ** 2)

    def sample(self, grid: GridSpec) -> np.ndarray:
        """Spatial values on the nodes (periodized, which is harmless while the window fits)."""
        Xi1, Xi2 = grid.freq_mesh()
        return inverse_ft_array(self.fourier(Xi1, Xi2).astype(complex), grid).real


@dataclass
class TimeBlock:
    j: int
    t: float
    interval: tuple
    piece: FrequencyField
    truncation_loss: float


@dataclass
class TimeBlockDecomposition:
    """Blocks ``(j, t_j, I_j, f_j)`` for ``j = 1..N`` and the data they came from."""

    N: int
    fhat: FrequencyField
    window: BlockWindow
    blocks: list = field(default_factory=list)

    @property
    def orthogonality_constant(self) -> float:
        """``sum_j ||f_j||^2 / ||f||^2``."""
        f2 = self.fhat.norm() ** 2
        if f2 == 0:
            return 0.0
        return float(sum(b.piece.norm() ** 2 for b in self.blocks) / f2)

    @property
    def max_truncation_loss(self) -> float:
        return max((b.truncation_loss for b in self.blocks), default=0.0)

    def tiles(self) -> bool:
        """The intervals cover ``[0, N^2]`` and overlap only at endpoints."""
        ends = [b.interval for b in self.blocks]
        ok = abs(ends[0][0]) < 1e-12 and abs(ends[-1][1] - self.N**2) < 1e-9
        return ok and all(abs(a[1] - b[0]) < 1e-12 for a, b in zip(ends, ends[1:]))


def build_time_blocks(fhat: FrequencyField, N: int, plateau: float = None,
                      tol: float = TRUNCATION_TOL) -> TimeBlockDecomposition:
    """Pieces ``f_j = W e^{i t_j Delta} f`` truncated to the dilated annulus.

    The evolution is the planar one: ``f`` is read as a function on the plane
    that is negligible outside the cell.

    Raises
    ------
    AccuracyError
        If some piece loses more than ``tol * ||f||^2`` in the truncation.
    """
    g = fhat.grid
    window = BlockWindow.for_scale(N, plateau)
    if window.radius + 5 * window.sigma > g.L / 2:
        raise ValueError(f"window of radius {window.radius} does not fit in the cell of side {g.L}")
    W = window.sample(g)
    dil = SUPPORT_DILATION / N
    support = Annulus(max(0.5 - dil, 0.0), 1.0 + dil, tag="A(1)+8/N")
    Xi1, Xi2 = g.freq_mesh()
    keep = support.mask(Xi1, Xi2)
    f2 = fhat.norm() ** 2
    dec = TimeBlockDecomposition(N, fhat, window)
    times = N * np.arange(1, N + 1, dtype=float)
    if f2 == 0:
        for j, t in enumerate(times, start=1):
            zero = FrequencyField(g, np.zeros_like(fhat.values), support)
            dec.blocks.append(TimeBlock(j, t, (t - N, t), zero, 0.0))
        return dec
    ev = PlaneEvaluator(fhat)
    losses = []
    for j, t in enumerate(times, start=1):
        u = ev.at([t])[0]
        piece = forward_ft(SpatialField(g, W * u)).values
        lost = float(np.sum(np.abs(piece[~keep]) ** 2) * (2 * np.pi * g.dxi) ** 2 / f2)
        losses.append(lost)
        piece = np.where(keep, piece, 0.0)
        dec.blocks.append(TimeBlock(j, t, (t - N, t), FrequencyField(g, piece, support), lost))
    if max(losses) > tol:
        raise AccuracyError(
            f"truncation to the dilated annulus loses {max(losses):.3g} of the squared mass (> {tol})",
            iterates=tuple(losses))
    return dec


@dataclass
class DominationReport:
    N: int
    defect: float
    per_block: list
    dt: float


def domination_check(dec: TimeBlockDecomposition, dt: float = 0.25, blocks=None) -> DominationReport:
    """``max (|e^{itDelta} f(x)| - |e^{i(t - t_j)Delta} f_j(x)|)_+ / ||f||_2`` over ``|x| <= N``, ``t`` in ``I_j``.

    ``blocks`` restricts the check to some block indices ``j`` (default all).
    """
    N = dec.N
    f_norm = dec.fhat.norm()
    rows, cols = ball_rows_cols(dec.fhat.grid, (0.0, 0.0), N)
    if f_norm == 0:
        return DominationReport(N, 0.0, [0.0] * len(dec.blocks), dt)
    full = PlaneEvaluator(dec.fhat, rows, cols)
    mask = ball_mask_on(full.x1, full.x2, (0.0, 0.0), N)
    per_block = []
    for b in dec.blocks:
        if blocks is not None and b.j not in blocks:
            continue
        ts = SpacetimeRegion(b.interval[0], b.interval[1], dt).times
        u = np.abs(full.at(ts))
        piece_ev = BoxEvaluator(b.piece, rows, cols)
        v = np.abs(piece_ev.at(ts - b.t))
        d = np.maximum(u - v, 0.0)[:, mask]
        per_block.append(float(d.max() / f_norm) if d.size else 0.0)
    return DominationReport(N, max(per_block, default=0.0), per_block, dt)


# ---------------------------------------------------------------------------
# ratio experiments on the periodic cell


def _prefix_maxima(fhat, radius, t_split, t_end, dt, evaluator_factory=None):
    """Maximal functions over ``[0, t_split]`` and ``[0, t_end]`` from one sweep in time."""
    g = fhat.grid
    rows, cols = ball_rows_cols(g, (0.0, 0.0), radius)
    ev = (evaluator_factory or make_evaluator)(fhat, rows, cols)
    mask = ball_mask_on(ev.x1, ev.x2, (0.0, 0.0), radius)
    times = SpacetimeRegion(0.0, t_end, dt).times
    short = np.zeros(ev.shape)
    long_ = np.zeros(ev.shape)
    for ts, U in ev.stream(times):
        A = np.abs(U)
        long_ = np.maximum(long_, A.max(axis=0))
        early = ts <= t_split + 1e-12
        if early.any():
            short = np.maximum(short, A[early].max(axis=0))
    h = g.h
    return (float(np.sqrt(np.sum(short[mask] ** 2)) * h),
            float(np.sqrt(np.sum(long_[mask] ** 2)) * h))


def short_long_norms(fhat: FrequencyField, N: int, dt: float = 0.125,
                     evaluator_factory=None) -> tuple:
    """``(short, long)``: maximal norms in ``L^2(B(0,N))`` over ``[0,N]`` and over ``[0,N^2]``."""
    return _prefix_maxima(fhat, N, N, float(N) ** 2, dt, evaluator_factory)


def short_to_long_time_ratio(fhat: FrequencyField, N: int, dt: float = 0.125,
                             evaluator_factory=None) -> float:
    """``||sup_{[0,N^2]} |e^{itDelta} f| ||_{L^2(B(0,N))} / ||sup_{[0,N]} |e^{itDelta} f| ||_{L^2(B(0,N))}``."""
    short, long_ = short_long_norms(fhat, N, dt, evaluator_factory)
    if not short > 0:
        raise UndefinedRatioError("short-time maximal norm vanishes")
    return long_ / short


def wide_narrow_norms(fhat: FrequencyField, N: int, lam: float = 2, dt: float = 0.125,
                      evaluator_factory=None) -> tuple:
    """``(wide, narrow)``: maximal norms over ``[0,N]`` in ``L^2(B(0, lam N))`` and ``L^2(B(0,N))``.

    Raises
    ------
    DomainError
        If ``B(0, lam N)`` does not fit in the cell.
    """
    if lam not in (2, 4):
        raise ValueError(f"lam must be 2 or 4, got {lam}")
    region = SpacetimeRegion(0.0, float(N), dt, radius=lam * N)
    mf = maximal_function(fhat, region, evaluator_factory)
    return mf.norm((0.0, 0.0), lam * N), mf.norm((0.0, 0.0), N)


def wide_ball_ratio(fhat: FrequencyField, N: int, lam: float = 2, dt: float = 0.125,
                    evaluator_factory=None) -> float:
    """``||sup_{[0,N]} |e^{itDelta} f| ||_{L^2(B(0, lam N))}`` over the same on ``B(0, N)``."""
    wide, narrow = wide_narrow_norms(fhat, N, lam, dt, evaluator_factory)
    if not narrow > 0:
        raise UndefinedRatioError("maximal norm on B(0, N) vanishes")
    return wide / narrow


def local_global_experiment(fhat: FrequencyField, N: int, dt: float = 0.125,
                            evaluator_factory=None) -> tuple:
    """``(local, global)``: ``||sup_{[0,N]}|e^{itDelta} f| ||_{L^2(B(0,N))}`` and
    ``||sup_{[0,N^2]}|e^{itDelta} f| ||_{L^2(cell)}`` for unit-norm data.
    """
    norm = fhat.norm()
    if not norm > 0:
        raise UndefinedRatioError("data vanish")
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"data must have unit L^2 norm, got {norm}")
    local = maximal_function(fhat, SpacetimeRegion(0.0, float(N), dt, radius=N),
                             evaluator_factory).norm((0.0, 0.0), N)
    glob = maximal_function(fhat, SpacetimeRegion(0.0, float(N) ** 2, dt),
                            evaluator_factory).norm()
    return local, glob
