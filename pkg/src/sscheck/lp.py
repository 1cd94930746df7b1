"""Dense linear programming kernels.

Everything here is built on one revised-simplex routine for standard-form
problems ``min c'z s.t. M z = b, z >= 0`` with Bland's anti-cycling rule and
an explicit pivot budget.  Two front ends use it:

* ``cone_member`` decides v in cone(H) by a phase-1 LP whose artificial basis
  is feasible by construction; a positive optimum yields a separating Farkas
  vector.
* ``maximize_linear`` maximizes c'x over a boxed Polytope by solving the
  standard-form *dual*, whose basis has only r rows (r << number of
  constraints in all target scenarios).  The optimal simplex multipliers are
  exactly a primal vertex; an unbounded dual ray is exactly a primal
  infeasibility certificate.

The pivot loop is jitted; the dual constraint matrix depends only on the
polytope's normals, so :class:`BoxLpContext` builds it once and reuses it for
every box the branch-and-bound visits.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from numba import njit

from .core import DEFAULT_TOLERANCES, FactorMatrix, Polytope, Tolerances

__all__ = [
    "LpStatus",
    "LpResult",
    "LpError",
    "PivotLimitExceeded",
    "PolytopeInfeasibleError",
    "FarkasCertificate",
    "BoxLpContext",
    "cone_member",
    "maximize_linear",
    "coordinate_range",
]


class LpError(Exception):
    """Base class for LP solver failures (not for infeasible models)."""


class PivotLimitExceeded(LpError):
    """The simplex did not converge within its pivot budget."""


class PolytopeInfeasibleError(LpError):
    """Raised by helpers that need a feasible polytope; carries the certificate."""

    def __init__(self, certificate):
        super().__init__("polytope is infeasible")
        self.certificate = certificate


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers proving {N x >= 0, lower <= x <= upper, e'x = 1} empty.

    The certificate satisfies ``N' w + wl - wu = mu e`` with w, wl, wu >= 0
    and ``mu - lower' wl + upper' wu < 0``; any feasible x would make the
    last expression nonnegative.
    """

    row_mult: np.ndarray
    lower_mult: np.ndarray
    upper_mult: np.ndarray
    eq_mult: float

    def verify(self, polytope: Polytope, eps_feas: float = DEFAULT_TOLERANCES.eps_feas) -> bool:
        w, wl, wu = self.row_mult, self.lower_mult, self.upper_mult
        if np.any(w < -eps_feas) or np.any(wl < -eps_feas) or np.any(wu < -eps_feas):
            return False
        resid = polytope.normals.T @ w + wl - wu - self.eq_mult * np.ones(polytope.dim)
        if np.max(np.abs(resid)) > eps_feas * max(1.0, float(np.abs(w).sum())):
            return False
        gap = self.eq_mult - float(polytope.lower @ wl) + float(polytope.upper @ wu)
        return gap < -eps_feas


@dataclass(frozen=True)
class LpResult:
    """Outcome of an LP solve.

    Exactly one of (feasible witness, certificate) is populated: ``point`` and
    ``objective`` when OPTIMAL, ``certificate`` when INFEASIBLE (a separating
    vector for ``cone_member``, a :class:`FarkasCertificate` for
    ``maximize_linear``).
    """

    status: LpStatus
    point: Optional[np.ndarray] = None
    objective: float = float("nan")
    certificate: object = None
    pivots: int = 0


_REDUCED_COST_TOL = 1e-9
_PIVOT_TOL = 1e-9
_REFACTOR_EVERY = 64

_OPTIMAL, _UNBOUNDED, _PIVOT_LIMIT, _SINGULAR = 0, 1, 2, 3


@njit(cache=True)
def _simplex_kernel(M, Mt, b, cost, basis, max_pivots):  # pragma: no cover
    """Bland-rule revised simplex with a product-form basis inverse.

    Returns (status, pivots, entering, xb, pi, d): status 0 optimal,
    1 unbounded (entering/d describe the ray), 2 pivot limit, 3 singular
    basis.  Mutates ``basis`` in place.
    """
    m, ncols = M.shape
    B = np.empty((m, m))
    xb = np.empty(m)
    pi = np.empty(m)
    d = np.empty(m)
    for i in range(m):
        for t in range(m):
            B[t, i] = M[t, basis[i]]
    try:
        binv = np.linalg.inv(B)
    except Exception:
        return _SINGULAR, 0, -1, xb, pi, d
    since = 0
    for pivot in range(max_pivots):
        if since >= _REFACTOR_EVERY:
            for i in range(m):
                for t in range(m):
                    B[t, i] = M[t, basis[i]]
            try:
                binv = np.linalg.inv(B)
            except Exception:
                return _SINGULAR, pivot, -1, xb, pi, d
            since = 0
        bad = False
        for i in range(m):
            s = 0.0
            sp = 0.0
            for t in range(m):
                s += binv[i, t] * b[t]
                sp += binv[t, i] * cost[basis[t]]
            xb[i] = s
            pi[i] = sp
            if not (np.isfinite(s) and np.isfinite(sp)):
                bad = True
        if bad:
            return _SINGULAR, pivot, -1, xb, pi, d
        # entering column: lowest index with negative reduced cost (Bland)
        j = -1
        for col in range(ncols):
            s = cost[col]
            for t in range(m):
                s -= Mt[col, t] * pi[t]
            if s < -_REDUCED_COST_TOL:
                basic = False
                for i in range(m):
                    if basis[i] == col:
                        basic = True
                        break
                if not basic:
                    j = col
                    break
        if j < 0:
            for i in range(m):
                if xb[i] < 0.0:
                    xb[i] = 0.0
            return _OPTIMAL, pivot, -1, xb, pi, d
        for i in range(m):
            s = 0.0
            for t in range(m):
                s += binv[i, t] * M[t, j]
            d[i] = s
        rmin = np.inf
        for i in range(m):
            if d[i] > _PIVOT_TOL:
                v = xb[i]
                if v < 0.0:
                    v = 0.0
                ratio = v / d[i]
                if ratio < rmin:
                    rmin = ratio
        if rmin == np.inf:
            for i in range(m):
                if xb[i] < 0.0:
                    xb[i] = 0.0
            return _UNBOUNDED, pivot, j, xb, pi, d
        # leaving row: lowest basic variable index among the near-ties (Bland)
        leave = -1
        leave_var = np.int64(2) ** 62
        for i in range(m):
            if d[i] > _PIVOT_TOL:
                v = xb[i]
                if v < 0.0:
                    v = 0.0
                if v / d[i] <= rmin + _PIVOT_TOL and basis[i] < leave_var:
                    leave_var = basis[i]
                    leave = i
        dl = d[leave]
        for t in range(m):
            binv[leave, t] /= dl
        for i in range(m):
            if i != leave:
                di = d[i]
                if di != 0.0:
                    for t in range(m):
                        binv[i, t] -= di * binv[leave, t]
        basis[leave] = j
        since += 1
    return _PIVOT_LIMIT, max_pivots, -1, xb, pi, d


def _run_simplex(M, b, cost, basis, max_pivots):
    M = np.ascontiguousarray(M, dtype=np.float64)
    Mt = np.ascontiguousarray(M.T)
    basis = np.asarray(basis, dtype=np.int64).copy()
    status, pivots, j, xb, pi, d = _simplex_kernel(
        M, Mt, np.ascontiguousarray(b, dtype=np.float64),
        np.ascontiguousarray(cost, dtype=np.float64), basis, max_pivots
    )
    if status == _PIVOT_LIMIT:
        raise PivotLimitExceeded(f"no convergence within {max_pivots} pivots")
    if status == _SINGULAR:
        raise LpError(f"singular basis after {pivots} pivots")
    return status, basis, xb, pi, j, d, pivots


def _default_pivot_budget(m: int, ncols: int) -> int:
    return 200 + 40 * (m + ncols)


def cone_member(H: FactorMatrix, v, *, tol: Tolerances | None = None) -> LpResult:
    """Decide whether v lies in cone(H) = {H y : y >= 0}.

    OPTIMAL carries a witness y >= 0 with H y = v (within eps_feas).
    INFEASIBLE carries a separating vector p with p'H >= 0 and p'v < 0.
    """
    tol = tol or DEFAULT_TOLERANCES
    v = np.asarray(v, dtype=float)
    if v.shape != (H.r,):
        raise ValueError(f"expected a vector of dimension {H.r}, got shape {v.shape}")
    A = H.entries
    r, n = A.shape
    signs = np.where(v >= 0.0, 1.0, -1.0)
    M = np.concatenate([A, np.diag(signs)], axis=1)
    cost = np.concatenate([np.zeros(n), np.ones(r)])
    basis = np.arange(n, n + r)
    status, basis, xb, pi, _, _, pivots = _run_simplex(
        M, v, cost, basis, _default_pivot_budget(r, n + r)
    )
    if status != _OPTIMAL:  # cost is bounded below by zero
        raise LpError("phase-1 LP reported unbounded; inconsistent input")
    art_total = float(sum(xb[i] for i, col in enumerate(basis) if col >= n))
    if art_total <= tol.eps_feas:
        y = np.zeros(n)
        for i, col in enumerate(basis):
            if col < n:
                y[col] = max(xb[i], 0.0)
        if np.max(np.abs(A @ y - v)) > 10.0 * tol.eps_feas:
            raise LpError("membership witness fails verification; ill-conditioned basis")
        return LpResult(LpStatus.OPTIMAL, point=y, objective=0.0, pivots=pivots)
    # minimal artificial mass is pi'v > 0; p = -pi separates v from cone(H)
    p = -pi
    if np.any(p @ A < -10.0 * tol.eps_feas) or p @ v >= 0.0:
        raise LpError("separating vector fails verification; ill-conditioned basis")
    return LpResult(LpStatus.INFEASIBLE, certificate=p, objective=art_total, pivots=pivots)


class BoxLpContext:
    """Reusable workspace for LPs over one polytope with varying boxes.

    The dual constraint matrix depends only on the polytope's normals, so one
    context serves every node of a branch-and-bound run; bounds enter through
    the cost vector alone.
    """

    def __init__(self, polytope: Polytope, tol: Tolerances | None = None):
        self.polytope = polytope
        self.tol = tol or DEFAULT_TOLERANCES
        A = polytope.normals
        self.n, self.r = A.shape
        eye = np.eye(self.r)
        cols = [-A.T, -eye, eye]
        if polytope.sum_constraint:
            ones = np.ones((self.r, 1))
            cols += [ones, -ones]
        self.M = np.ascontiguousarray(np.concatenate(cols, axis=1))
        self.Mt = np.ascontiguousarray(self.M.T)
        self.max_pivots = _default_pivot_budget(self.r, self.M.shape[1])

    def _cost(self, lower, upper) -> np.ndarray:
        parts = [np.zeros(self.n), -lower, upper]
        if self.polytope.sum_constraint:
            parts.append(np.array([1.0, -1.0]))
        return np.concatenate(parts)

    def maximize(self, c, lower, upper) -> LpResult:
        """Maximize c'x over the polytope intersected with [lower, upper]."""
        n, r = self.n, self.r
        c = np.ascontiguousarray(c, dtype=np.float64)
        lower = np.maximum(self.polytope.lower, lower)
        upper = np.minimum(self.polytope.upper, upper)
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise LpError("box LPs require finite bounds on every coordinate")
        cost = self._cost(lower, upper)
        basis = np.where(c >= 0.0, n + r + np.arange(r), n + np.arange(r))
        status, basis, xb, pi, j, d, pivots = _run_simplex(
            self.M, c, cost, basis, self.max_pivots
        )
        if status == _OPTIMAL:
            x = pi  # dual multipliers of the optimal basis are a primal vertex
            slack = 10.0 * max(self.tol.eps_feas, _REDUCED_COST_TOL)
            if not self._feasible(x, lower, upper, slack):
                raise LpError("optimal multipliers violate primal feasibility; "
                              "basis too ill-conditioned")
            return LpResult(LpStatus.OPTIMAL, point=x, objective=float(c @ x), pivots=pivots)
        # unbounded dual ray => primal infeasibility certificate
        ray = np.zeros(self.M.shape[1])
        ray[j] = 1.0
        ray[basis] = np.maximum(-d, 0.0)
        mu = float(ray[-2] - ray[-1]) if self.polytope.sum_constraint else 0.0
        cert = FarkasCertificate(
            row_mult=ray[: n].copy(),
            lower_mult=ray[n : n + r].copy(),
            upper_mult=ray[n + r : n + 2 * r].copy(),
            eq_mult=mu,
        )
        if not cert.verify(self.polytope.with_box(lower, upper), self.tol.eps_feas):
            raise LpError("unbounded ray fails certificate verification; "
                          "basis too ill-conditioned")
        return LpResult(LpStatus.INFEASIBLE, certificate=cert, pivots=pivots)

    def _feasible(self, x, lower, upper, eps) -> bool:
        if self.polytope.sum_constraint and abs(float(x.sum()) - 1.0) > eps:
            return False
        if np.any(self.polytope.normals @ x < -eps):
            return False
        return bool(np.all(x >= lower - eps) and np.all(x <= upper + eps))

    def coordinate_range(self, i: int, lower, upper) -> tuple[float, float]:
        c = np.zeros(self.r)
        c[i] = -1.0
        low = self.maximize(c, lower, upper)
        if low.status == LpStatus.INFEASIBLE:
            raise PolytopeInfeasibleError(low.certificate)
        c[i] = 1.0
        high = self.maximize(c, lower, upper)
        return -low.objective, high.objective


def maximize_linear(
    polytope: Polytope, c, *, tol: Tolerances | None = None
) -> LpResult:
    """Maximize c'x over the polytope; the returned point is always a vertex.

    Never UNBOUNDED because the box is required to be finite.  INFEASIBLE
    carries a :class:`FarkasCertificate`.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (polytope.dim,):
        raise ValueError(f"objective must have dimension {polytope.dim}, got shape {c.shape}")
    ctx = BoxLpContext(polytope, tol)
    return ctx.maximize(c, polytope.lower, polytope.upper)


def coordinate_range(
    polytope: Polytope, i: int, *, tol: Tolerances | None = None
) -> tuple[float, float]:
    """Exact LP minimum and maximum of x_i over the polytope.

    Raises :class:`PolytopeInfeasibleError` when the polytope is empty.
    """
    if not 0 <= i < polytope.dim:
        raise ValueError(f"coordinate {i} out of range for dimension {polytope.dim}")
    ctx = BoxLpContext(polytope, tol)
    return ctx.coordinate_range(i, polytope.lower, polytope.upper)
