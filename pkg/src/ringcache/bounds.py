"""Closed-form loads, cut-set converse bounds and gap checks.

Everything here is exact rational arithmetic; no floats. The optimal
uncoded-placement load has two parameter regimes split by the sign of
b*(K-1) - 2a: below the threshold the three corner points (0, K),
(a+b, (K-1)/2) and (2a+b, 0) are all active, at or above it coded
delivery stops helping and only the outer corners remain.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from ringcache.model import InvalidInstanceError, ProblemInstance


class PointLabel(enum.Enum):
    ACHIEVABLE = "achievable"
    OPT_UNCODED = "opt_uncoded"
    CUTSET = "cutset"
    MULTIACCESS_OPT = "multiaccess_opt"
    LP = "lp"


@dataclass(frozen=True)
class TradeoffPoint:
    M: Fraction
    R: Fraction
    label: PointLabel

    def __post_init__(self) -> None:
        if self.R < 0:
            raise ValueError("load must be non-negative")


def coded_gain_regime(inst: ProblemInstance) -> bool:
    """True when b(K-1) < 2a, i.e. the MAN t=1 corner is on the optimal curve."""
    return inst.b * (inst.K - 1) < 2 * inst.a


def rstar_u(inst: ProblemInstance) -> Fraction:
    """Optimal worst-case load under uncoded placement at the instance's M."""
    K, a, b, M = inst.K, inst.a, inst.b, inst.M
    if not 0 <= M <= inst.m_max:
        raise InvalidInstanceError(f"M={M} outside [0, {inst.m_max}]")
    if coded_gain_regime(inst):
        if M <= a + b:
            return Fraction(K) - Fraction(K + 1, 2 * (a + b)) * M
        return Fraction((K - 1) * (2 * a + b), 2 * a) - Fraction(K - 1, 2 * a) * M
    return Fraction(K) - Fraction(K, 2 * a + b) * M


def man_load(K: int, t: int) -> Fraction:
    """Load (K-t)/(t+1) of the t-th canonical coded-caching corner point."""
    if not 0 <= t <= K:
        raise ValueError(f"t must lie in [0, K]={K}, got {t}")
    return Fraction(K - t, t + 1)


def cutset_bound(inst: ProblemInstance) -> Fraction:
    """Cut-set lower bound on the unrestricted optimal load, clamped at 0.

    The cut takes every second cache node plus 2a+b transmissions; with K
    even the cut covers K/2 nodes, with K odd only (K-1)/2 fit.
    """
    K, M = inst.K, inst.M
    half = Fraction(K, 2) if K % 2 == 0 else Fraction(K - 1, 2)
    return max(Fraction(0), half * (1 - M / inst.m_max))


def rstar_multiaccess(inst: ProblemInstance) -> Fraction:
    """Optimal load when every user reads L >= 2 consecutive caches."""
    if inst.L < 2:
        raise InvalidInstanceError("multiaccess optimum requires L >= 2")
    K, a, b, M = inst.K, inst.a, inst.b, inst.M
    return max(Fraction(0), Fraction(K) - Fraction(K, a + b) * M)


def closed_form_points(inst: ProblemInstance, grid) -> list:
    """TradeoffPoint rows of every closed-form curve on the given M grid."""
    points = []
    for m in grid:
        sub = inst.with_m(m)
        points.append(TradeoffPoint(M=sub.M, R=rstar_u(sub), label=PointLabel.OPT_UNCODED))
        points.append(TradeoffPoint(M=sub.M, R=cutset_bound(sub), label=PointLabel.CUTSET))
        if inst.L >= 2:
            points.append(
                TradeoffPoint(M=sub.M, R=rstar_multiaccess(sub), label=PointLabel.MULTIACCESS_OPT)
            )
    return points


@dataclass(frozen=True)
class GapReport:
    ratio: Fraction
    bound: int
    passed: bool
    ratio_at_zero: Fraction


def gap_check(inst: ProblemInstance, grid: int = 11) -> GapReport:
    """Worst ratio rstar_u / cutset_bound over the memory range.

    Both curves are piecewise linear with breakpoints in {0, a+b, 2a+b},
    so evaluating there suffices; an 11-point grid per segment guards the
    breakpoint argument. Points where the cut-set bound is 0 are skipped
    (both curves vanish together only at M = 2a+b).
    """
    K = inst.K
    bound = 2 if K % 2 == 0 else 3
    lo, mid, hi = Fraction(0), Fraction(inst.a + inst.b), Fraction(inst.m_max)
    points = {lo, mid, hi}
    for s_lo, s_hi in ((lo, mid), (mid, hi)):
        step = (s_hi - s_lo) / (grid - 1)
        points.update(s_lo + j * step for j in range(grid))
    worst = Fraction(0)
    for m in sorted(points):
        sub = inst.with_m(m)
        cut = cutset_bound(sub)
        if cut == 0:
            continue
        worst = max(worst, rstar_u(sub) / cut)
    at_zero = rstar_u(inst.with_m(0)) / cutset_bound(inst.with_m(0))
    return GapReport(ratio=worst, bound=bound, passed=worst <= bound, ratio_at_zero=at_zero)
