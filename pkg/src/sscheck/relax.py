"""Linear overestimation of the squared norm over a box, plus box tightening.

The objective sum(x_i^2) is overestimated coordinatewise by the secant of
x -> x^2 over [l_i, u_i], namely (l_i + u_i) x_i - l_i u_i (the two upper
envelope inequalities of the bilinear relaxation coincide for a square).  The
bound is exact at every box corner and its gap on coordinate i is at most
(u_i - l_i)^2 / 4, so splitting boxes shrinks it quadratically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DEFAULT_TOLERANCES, Polytope, Tolerances
from . import lp

__all__ = [
    "SecantBound",
    "secant_overestimator",
    "node_upper_bound",
    "propagate_box",
    "tighten_box",
]


@dataclass(frozen=True)
class SecantBound:
    """Affine overestimator sum(x_i^2) <= slope'x + offset on a box."""

    slope: np.ndarray
    offset: float

    def __call__(self, x) -> float:
        return float(self.slope @ np.asarray(x, dtype=float)) + self.offset


def secant_overestimator(l, u) -> SecantBound:
    """Secant bound with slope l + u and offset -sum(l_i u_i)."""
    l = np.asarray(l, dtype=float)
    u = np.asarray(u, dtype=float)
    if l.shape != u.shape or l.ndim != 1:
        raise ValueError("bounds must be vectors of equal dimension")
    if not (np.all(np.isfinite(l)) and np.all(np.isfinite(u))):
        raise ValueError("secant bounds require finite box bounds")
    if np.any(l > u):
        i = int(np.argmax(l - u))
        raise ValueError(f"empty interval on coordinate {i}: [{l[i]}, {u[i]}]")
    return SecantBound(slope=l + u, offset=-float(l @ u))


def node_upper_bound(
    polytope: Polytope,
    l,
    u,
    *,
    tol: Tolerances | None = None,
    ctx: lp.BoxLpContext | None = None,
) -> tuple[float, Optional[np.ndarray]]:
    """LP upper bound on max sum(x_i^2) over polytope intersect [l, u].

    Returns the bound and the LP maximizer (a vertex of the intersection), or
    (-inf, None) when the node is infeasible.  Pass a shared ``ctx`` when
    solving many boxes of the same polytope.
    """
    tol = tol or DEFAULT_TOLERANCES
    l = np.asarray(l, dtype=float)
    u = np.asarray(u, dtype=float)
    bound = secant_overestimator(l, u)
    ctx = ctx or lp.BoxLpContext(polytope, tol)
    res = ctx.maximize(bound.slope, l, u)
    if res.status == lp.LpStatus.INFEASIBLE:
        return float("-inf"), None
    return res.objective + bound.offset, res.point


def propagate_box(
    polytope: Polytope,
    l,
    u,
    *,
    passes: int = 2,
    eps_feas: float = DEFAULT_TOLERANCES.eps_feas,
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Interval-arithmetic tightening of [l, u] against the constraints.

    Because every constraint normal is nonnegative, a row a'x >= 0 can only
    raise lower bounds: x_j >= u_j - (a'u) / a_j whenever a_j > 0.  The sum
    constraint e'x = 1 tightens both sides.  Sound: no feasible point is ever
    removed.  Returns None when the box is proven empty.
    """
    l = np.array(l, dtype=float)
    u = np.array(u, dtype=float)
    A = polytope.normals
    positive = A > 0.0
    safe = np.where(positive, A, 1.0)
    for _ in range(passes):
        if polytope.sum_constraint:
            sl, su = l.sum(), u.sum()
            u = np.minimum(u, 1.0 - (sl - l) + eps_feas)
            l = np.maximum(l, 1.0 - (su - u) - eps_feas)
            if np.any(l > u + eps_feas):
                return None
        row_max = A @ u
        if np.any(row_max < -eps_feas):
            return None
        # x_j >= u_j - row_max_i / a_ij for every row i with a_ij > 0
        cand = u[None, :] - np.where(positive, row_max[:, None] / safe, np.inf)
        l = np.maximum(l, cand.max(axis=0) - eps_feas)
        if np.any(l > u + eps_feas):
            return None
    return np.minimum(l, u), u


def tighten_box(
    polytope: Polytope,
    l,
    u,
    *,
    tol: Tolerances | None = None,
    ctx: lp.BoxLpContext | None = None,
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """LP-exact tightening: replace [l, u] by the coordinatewise range of the
    intersection.  Returns None when the intersection is empty."""
    tol = tol or DEFAULT_TOLERANCES
    ctx = ctx or lp.BoxLpContext(polytope, tol)
    lo = np.maximum(np.asarray(l, dtype=float), polytope.lower)
    hi = np.minimum(np.asarray(u, dtype=float), polytope.upper)
    for i in range(polytope.dim):
        try:
            a, b = ctx.coordinate_range(i, lo, hi)
        except lp.PolytopeInfeasibleError:
            return None
        except lp.LpError:
            continue  # tightening is optional; keep the old range
        # widen by the feasibility slack so LP rounding never cuts a feasible
        # point, and stay inside the incoming box
        lo[i] = min(max(lo[i], a - tol.eps_feas), hi[i])
        hi[i] = max(min(hi[i], b + tol.eps_feas), lo[i])
    return lo, hi
