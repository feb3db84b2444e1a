"""Quick structural checks of the propagator and the decompositions.

Each check returns a :class:`CheckResult`; :func:`property_suite` runs them
all.  These are the identities every other measurement relies on, cheap
enough to run before a sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bumps import translate_sum
from .generators import random_annulus
from .grid import GridSpec, forward_ft, make_grid
from .propagator import evolve, evolve_oracle, galilean_boost, parabolic_rescale
from .whitney import WhitneyPartition, product_identity


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (tolerance {self.tolerance:.0e})"


def oracle_equivalence(seeds=range(20), t=3.7) -> CheckResult:
    """Max-abs gap between the FFT evolution and the literal double sum on 32^2 grids."""
    g = GridSpec(64.0, 32)
    worst = 0.0
    for s in seeds:
        f = random_annulus(int(s), g)
        worst = max(worst, float(np.abs(evolve(f, t).values - evolve_oracle(f, t).values).max()))
    return CheckResult("oracle equivalence (32^2)", worst, 1e-9)


def unitarity_group_law(n: int = 256, times=(0.5, 8.0, 64.0), seed: int = 0) -> CheckResult:
    """Relative norm drift and ``e^{isDelta} e^{itDelta} = e^{i(s+t)Delta}`` defect."""
    g = GridSpec(2.0 * n, n)
    f = random_annulus(seed, g)
    f_norm = f.norm()
    worst = 0.0
    for t in times:
        u = evolve(f, t)
        worst = max(worst, abs(u.norm() / f_norm - 1.0))
        for s in times:
            two = evolve(forward_ft(u), s).values
            one = evolve(f, s + t).values
            gap = np.sqrt(np.sum(np.abs(two - one) ** 2)) * g.h
            worst = max(worst, gap / f_norm)
    return CheckResult(f"unitarity and group law ({n}^2)", worst, 1e-10)


def partition_of_unity(n_points: int = 100, seed: int = 0) -> CheckResult:
    """``|sum_k eta(x - k) - 1|`` at random planar points for both lattice windows."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-5, 5, size=(n_points, 2))
    worst = 0.0
    for kind in ("fejer", "vallee-poussin"):
        s = translate_sum(kind, x[:, 0]) * translate_sum(kind, x[:, 1])
        worst = max(worst, float(np.abs(s - 1).max()))
    return CheckResult("lattice partition of unity", worst, 1e-12)


def galilean_covariance(N: int = 8, steps: int = 2, shift_nodes: int = 3, seed: int = 0) -> CheckResult:
    """``e^{itDelta} g(x) = e^{-i lam x_1 + i t lam^2} e^{itDelta} f(x - 2 t lam e_1)``.

    ``lam = steps * dxi`` and ``t`` is chosen so that ``2 t lam`` is
    ``shift_nodes`` grid spacings; the shift is periodic.
    """
    g = make_grid(N)
    f = random_annulus(seed, g)
    lam = steps * g.dxi
    t = shift_nodes * g.h / (2 * lam)
    lhs = evolve(galilean_boost(f, lam), t).values
    X1, _ = g.mesh()
    moved = np.roll(evolve(f, t).values, shift_nodes, axis=0)
    rhs = np.exp(-1j * lam * X1 + 1j * t * lam**2) * moved
    return CheckResult("Galilean covariance", float(np.abs(lhs - rhs).max()), 1e-8)


def parabolic_covariance(N: int = 8, mu: int = 2, t: float = 6.0, seed: int = 0) -> CheckResult:
    """``e^{itDelta} g(mu x) = mu^{-2} e^{i(t/mu^2)Delta} f(x)`` at the old nodes."""
    g = make_grid(N)
    f = random_annulus(seed, g)
    gr = parabolic_rescale(f, mu)
    big = evolve(gr, t).values
    small = evolve(f, t / mu**2).values
    c_old, c_new = g.n // 2, gr.grid.n // 2
    idx = c_new + mu * (np.arange(g.n) - c_old)
    ok = (idx >= 0) & (idx < gr.grid.n)
    lhs = big[np.ix_(idx[ok], idx[ok])]
    rhs = small[np.ix_(ok, ok)] / mu**2
    return CheckResult("parabolic covariance", float(np.abs(lhs - rhs).max()), 1e-8)


def whitney_identity() -> CheckResult:
    g = GridSpec(64.0, 32)
    rep = product_identity(random_annulus(0, g), 0.7, WhitneyPartition(g))
    return CheckResult("Whitney product identity", rep.relative_error, 1e-6)


def property_suite() -> list:
    return [oracle_equivalence(), unitarity_group_law(), partition_of_unity(),
            galilean_covariance(), parabolic_covariance(), whitney_identity()]
