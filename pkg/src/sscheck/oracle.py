"""Exact small-instance machinery: brute-force vertex enumeration.

Every vertex of the feasible polytope satisfies r linearly independent active
constraints (the sum constraint is always active when present).  At desk scale
we simply enumerate constraint subsets, solve the r x r systems in batches,
filter by feasibility, and merge near-duplicates.  Deliberately brute force:
the point of this module is to be simple enough to audit, so it can serve as
an independent ground truth for the branch-and-bound path.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, combinations, islice
from math import comb

import numpy as np

from .core import DEFAULT_TOLERANCES, Polytope, Tolerances

__all__ = [
    "BudgetExceeded",
    "EnumerationLimits",
    "VertexList",
    "enumerate_vertices",
    "exact_max_norm",
]


class BudgetExceeded(Exception):
    """The combinatorial budget for exhaustive enumeration was passed."""


@dataclass(frozen=True)
class EnumerationLimits:
    """Caps on the exhaustive search; override to force larger instances."""

    max_dim: int = 8
    max_constraints: int = 60
    max_bases: int = 2_000_000


DEFAULT_LIMITS = EnumerationLimits()

_CHUNK = 65536


@dataclass(frozen=True)
class VertexList:
    vertices: list
    source: str

    def __len__(self) -> int:
        return len(self.vertices)

    def as_array(self) -> np.ndarray:
        if not self.vertices:
            return np.empty((0, 0))
        return np.stack(self.vertices)


def _inequality_rows(polytope: Polytope) -> tuple[np.ndarray, np.ndarray]:
    """All inequality constraints as rows (normal, rhs) with semantics
    normal'x >= rhs: the polytope rows, then lower, then upper bounds."""
    A = polytope.normals
    n, r = A.shape
    eye = np.eye(r)
    normals = np.concatenate([A, eye, -eye], axis=0)
    rhs = np.concatenate([np.zeros(n), polytope.lower, -polytope.upper])
    return normals, rhs


def _feasible_mask(points, normals, rhs, polytope, eps_feas):
    ok = np.all(points @ normals.T >= rhs[None, :] - eps_feas, axis=1)
    if polytope.sum_constraint:
        ok &= np.abs(points.sum(axis=1) - 1.0) <= eps_feas
    return ok


def _merge_clusters(points: np.ndarray, delta: float) -> list:
    """Deterministic near-duplicate merge: canonical lexicographic order,
    greedy representatives, l-inf radius delta."""
    # degenerate bases reproduce the same vertex many times over; collapse
    # everything that lands on a grid much finer than delta before the
    # quadratic greedy pass
    keys = np.round(points * (8.0 / delta))
    _, first = np.unique(keys, axis=0, return_index=True)
    points = points[np.sort(first)]
    order = np.lexsort(points.T[::-1])
    points = points[order]
    reps: list[np.ndarray] = []
    for p in points:
        if reps and np.min(np.max(np.abs(np.asarray(reps) - p), axis=1)) <= delta:
            continue
        reps.append(p)
    return reps


def enumerate_vertices(
    polytope: Polytope,
    limits: EnumerationLimits | None = None,
    *,
    tol: Tolerances | None = None,
) -> VertexList:
    """All vertices of the polytope by exhaustive basis enumeration.

    Raises :class:`BudgetExceeded` when the instance exceeds the limits
    (dimension, constraint count, or number of candidate bases).
    """
    limits = limits or DEFAULT_LIMITS
    tol = tol or DEFAULT_TOLERANCES
    r = polytope.dim
    normals, rhs = _inequality_rows(polytope)
    m = normals.shape[0]
    total_rows = m + (1 if polytope.sum_constraint else 0)
    if r > limits.max_dim:
        raise BudgetExceeded(f"dimension {r} exceeds cap {limits.max_dim}")
    if total_rows > limits.max_constraints:
        raise BudgetExceeded(
            f"{total_rows} constraints exceed cap {limits.max_constraints}"
        )
    if not (np.all(np.isfinite(polytope.lower)) and np.all(np.isfinite(polytope.upper))):
        raise ValueError("vertex enumeration requires a finite box")
    pick = r - 1 if polytope.sum_constraint else r
    n_bases = comb(m, pick)
    if n_bases > limits.max_bases:
        raise BudgetExceeded(f"{n_bases} candidate bases exceed cap {limits.max_bases}")

    # normalize rows so the determinant filter is scale free
    scale = np.linalg.norm(normals, axis=1)
    scale[scale == 0.0] = 1.0
    unit_normals = normals / scale[:, None]
    unit_rhs = rhs / scale

    found: list[np.ndarray] = []
    flat = chain.from_iterable(combinations(range(m), pick))
    while True:
        buf = np.fromiter(islice(flat, _CHUNK * pick), dtype=np.int64)
        if buf.size == 0:
            break
        idx = buf.reshape(-1, pick)
        systems = np.empty((idx.shape[0], r, r))
        rhs_mat = np.empty((idx.shape[0], r))
        if polytope.sum_constraint:
            systems[:, 0, :] = 1.0
            rhs_mat[:, 0] = 1.0
            systems[:, 1:, :] = unit_normals[idx]
            rhs_mat[:, 1:] = unit_rhs[idx]
        else:
            systems[:, :, :] = unit_normals[idx]
            rhs_mat[:, :] = unit_rhs[idx]
        dets = np.abs(np.linalg.det(systems))
        solvable = dets > 1e-10
        if not solvable.any():
            continue
        try:
            sols = np.linalg.solve(systems[solvable], rhs_mat[solvable][:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            # fall back to row-by-row when a near-singular system slips through
            sols = []
            for S, q in zip(systems[solvable], rhs_mat[solvable]):
                try:
                    sols.append(np.linalg.solve(S, q))
                except np.linalg.LinAlgError:
                    sols.append(np.full(r, np.nan))
            sols = np.asarray(sols)
        finite = np.all(np.isfinite(sols), axis=1)
        sols = sols[finite]
        if sols.size == 0:
            continue
        keep = _feasible_mask(sols, normals, rhs, polytope, tol.eps_feas)
        if keep.any():
            found.append(sols[keep])

    source = f"polytope with {m} inequality rows in dimension {r}"
    if not found:
        return VertexList(vertices=[], source=source)
    points = np.concatenate(found, axis=0)
    reps = _merge_clusters(points, tol.delta_unit)
    return VertexList(vertices=reps, source=source)


def exact_max_norm(
    polytope: Polytope,
    limits: EnumerationLimits | None = None,
    *,
    tol: Tolerances | None = None,
) -> tuple[float, list]:
    """Exact maximum of the squared norm over the polytope and every vertex
    attaining it within eps_pool (complete: strict convexity forces maximizers
    to vertices)."""
    tol = tol or DEFAULT_TOLERANCES
    vlist = enumerate_vertices(polytope, limits, tol=tol)
    if not vlist.vertices:
        raise ValueError("polytope is empty; no maximum exists")
    pts = vlist.as_array()
    values = np.einsum("ij,ij->i", pts, pts)
    best = float(values.max())
    maximizers = [pts[i] for i in np.flatnonzero(values >= best - tol.eps_pool)]
    return best, maximizers
