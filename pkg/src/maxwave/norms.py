"""Mixed space-time norms of ``F(x, t) = e^{itDelta} f(x)`` on sampled regions.

All norms are Riemann sums over grid nodes (weight ``h^2``) and time
samples (trapezoid weights, see :attr:`SpacetimeRegion.weights`), with the
x-sum outside and the t-sum inside.  Spatial balls include boundary nodes.
Suprema in time are maxima over the samples: they are lower bounds for the
true supremum, and halving the step is the check on their accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UndefinedRatioError
from .grid import FrequencyField, GridSpec, SpacetimeRegion, check_ball, check_same_grid
from .propagator import make_evaluator


def ball_rows_cols(grid: GridSpec, center, radius):
    """Node indices along each axis covering the bounding square of a ball (or all nodes)."""
    if radius is None:
        idx = np.arange(grid.n)
        return idx, idx
    check_ball(grid, center, radius)
    tol = 1e-12 * max(radius, 1.0)
    rows = np.nonzero(np.abs(grid.x - center[0]) <= radius + tol)[0]
    cols = np.nonzero(np.abs(grid.x - center[1]) <= radius + tol)[0]
    return rows, cols


def ball_mask_on(x1, x2, center, radius):
    if radius is None:
        return np.ones((x1.size, x2.size), dtype=bool)
    d = np.hypot(x1[:, None] - center[0], x2[None, :] - center[1])
    return d <= radius * (1 + 1e-12)


def _evaluator(fhat, region, evaluator_factory):
    rows, cols = ball_rows_cols(fhat.grid, region.center, region.radius)
    factory = evaluator_factory or make_evaluator
    ev = factory(fhat, rows, cols)
    mask = ball_mask_on(ev.x1, ev.x2, region.center, region.radius)
    return ev, mask


@dataclass(frozen=True)
class MaximalField:
    """``max_t |e^{itDelta} f(x)|`` over sampled times, on a rectangle of nodes.

    ``values[i, j]`` belongs to the node ``(x1[i], x2[j])``; ``argmax_t``
    records the sample time achieving the maximum.
    """

    grid: GridSpec
    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray
    argmax_t: np.ndarray
    dt: float
    t_range: tuple

    def norm(self, center=(0.0, 0.0), radius=None) -> float:
        """L^2 norm over a ball (``None``: every computed node)."""
        if radius is not None:
            lo1, hi1 = self.x1.min(), self.x1.max()
            lo2, hi2 = self.x2.min(), self.x2.max()
            h = self.grid.h
            if (center[0] - radius < lo1 - h or center[0] + radius > hi1 + h
                    or center[1] - radius < lo2 - h or center[1] + radius > hi2 + h):
                raise DomainError("ball leaves the nodes where the maximal function was computed")
        mask = ball_mask_on(self.x1, self.x2, center, radius)
        return float(np.sqrt(np.sum(self.values[mask] ** 2)) * self.grid.h)


def maximal_function(fhat: FrequencyField, region: SpacetimeRegion,
                     evaluator_factory=None) -> MaximalField:
    """Pointwise maximum of ``|e^{itDelta} f|`` over ``region.times``, on the ball's bounding square."""
    ev, _ = _evaluator(fhat, region, evaluator_factory)
    times = region.times
    best = np.zeros(ev.shape)
    arg = np.full(ev.shape, times[0])
    for ts, U in ev.stream(times):
        A = np.abs(U)
        k = np.argmax(A, axis=0)
        m = np.take_along_axis(A, k[None], axis=0)[0]
        upd = m > best
        best[upd] = m[upd]
        arg[upd] = ts[k[upd]]
    return MaximalField(fhat.grid, ev.x1, ev.x2, best, arg, region.dt, (region.t0, region.t1))


def maximal_norm(fhat: FrequencyField, region: SpacetimeRegion, evaluator_factory=None) -> float:
    """``|| max_t |e^{itDelta} f| ||_{L^2(ball)}``."""
    mf = maximal_function(fhat, region, evaluator_factory)
    return mf.norm(region.center, region.radius)


def _time_reduce(fhat, region, evaluator_factory, reducer):
    ev, mask = _evaluator(fhat, region, evaluator_factory)
    acc = np.zeros(ev.shape)
    w = region.weights
    times = region.times
    pos = 0
    for ts, U in ev.stream(times):
        acc += np.tensordot(w[pos:pos + ts.size], reducer(U), axes=(0, 0))
        pos += ts.size
    return acc, mask


def l2x_l4t_norm(fhat: FrequencyField, region: SpacetimeRegion, evaluator_factory=None) -> float:
    """``( sum_x ( sum_t |F|^4 w_t )^{1/2} h^2 )^{1/2}``."""
    acc, mask = _time_reduce(fhat, region, evaluator_factory, lambda U: np.abs(U) ** 4)
    return float(np.sqrt(np.sum(np.sqrt(acc[mask])) * fhat.grid.h**2))


def l2xt_norm(fhat: FrequencyField, region: SpacetimeRegion, evaluator_factory=None) -> float:
    """``( sum_x sum_t |F|^2 w_t h^2 )^{1/2}``."""
    acc, mask = _time_reduce(fhat, region, evaluator_factory, lambda U: np.abs(U) ** 2)
    return float(np.sqrt(np.sum(acc[mask])) * fhat.grid.h)


def l2x_linfty_t(fhat: FrequencyField, region: SpacetimeRegion, cube_half_width: float = None,
                 evaluator_factory=None) -> float:
    """``|| max_t |F| ||_{L^2(ball)}`` for data in a small cube.

    If ``cube_half_width`` is not given it is read from a declared box
    support.  ``r^2 T <= 1`` is required, with ``r`` the half-width and ``T``
    the end of the time range.
    """
    r = cube_half_width
    if r is None and fhat.declared_support is not None and hasattr(fhat.declared_support, "half_widths"):
        r = max(fhat.declared_support.half_widths)
    if r is not None and r * r * region.t1 > 1 + 1e-12:
        raise ValueError(f"cube half-width {r} and time {region.t1} violate r^2 N <= 1")
    return maximal_norm(fhat, region, evaluator_factory)


def l1x_l2t_bilinear(fhat: FrequencyField, ghat: FrequencyField, region: SpacetimeRegion,
                     evaluator_factory=None) -> float:
    """``sum_x ( sum_t |F G|^2 w_t )^{1/2} h^2`` with ``G = e^{itDelta} g``."""
    check_same_grid(fhat, ghat)
    ef, mask = _evaluator(fhat, region, evaluator_factory)
    eg, _ = _evaluator(ghat, region, evaluator_factory)
    acc = np.zeros(ef.shape)
    times = region.times
    w = region.weights
    chunk = min(ef.chunk_size(), eg.chunk_size())
    for s in range(0, times.size, chunk):
        ts = times[s:s + chunk]
        P = np.abs(ef.at(ts) * eg.at(ts)) ** 2
        acc += np.tensordot(w[s:s + ts.size], P, axes=(0, 0))
    return float(np.sum(np.sqrt(acc[mask])) * fhat.grid.h**2)


def safe_ratio(num: float, den: float, what: str = "ratio") -> float:
    if not den > 0:
        raise UndefinedRatioError(f"{what}: denominator is {den}")
    return num / den
