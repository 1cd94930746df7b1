"""Spatial branch-and-bound maximization of the squared Euclidean norm over a
boxed polytope.

Each node is a box; its upper bound is the secant-relaxation LP from
:mod:`sscheck.relax`, and the LP maximizer doubles as the incumbent candidate
(it is always feasible, being a vertex of the node's intersection with the
polytope).  Boxes are tightened by cheap interval propagation at every node
and by exact coordinate-range LPs every ``lp_stride`` levels.  Branching
splits the coordinate with the largest secant gap at the relaxation point,
clamped away from the box edges; node selection is best-upper-bound-first.

Three search modes share the engine:

* optimize  - close the gap between the incumbent and the bound (the default
  behaviour of :func:`maximize_norm`),
* pool      - additionally keep every discovered distinct near-optimal point,
  pruning only nodes that cannot reach the admission band,
* exists    - decide whether any feasible point reaches a target value
  (used by the scatteredness check to look for maximizers away from the unit
  vectors).

A run can stop early as soon as the incumbent passes ``stop_threshold``: any
certified value above one refutes scatteredness, so there is no reason to
finish the search.
"""
from __future__ import annotations

import heapq
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core import DEFAULT_TOLERANCES, FactorMatrix, Polytope, Tolerances
from .lp import BoxLpContext, LpError
from . import relax

__all__ = [
    "GlobalStatus",
    "BnbNode",
    "SolutionPool",
    "GlobalResult",
    "InfeasiblePolytopeError",
    "maximize_norm",
    "exists_above",
    "verify_certificate",
]

DEFAULT_DEADLINE = 300.0
DEFAULT_NODE_CAP = 1_000_000
DEFAULT_LP_STRIDE = 4


class InfeasiblePolytopeError(Exception):
    """The polytope has no feasible point at all (cannot happen for inputs
    that passed the necessary-condition screen)."""


class GlobalStatus(Enum):
    THRESHOLD_EXCEEDED = "threshold_exceeded"
    CONVERGED = "converged"
    DEADLINE = "deadline"


@dataclass(frozen=True)
class BnbNode:
    lower: np.ndarray
    upper: np.ndarray
    ub: float
    depth: int


@dataclass
class SolutionPool:
    """Distinct near-optimal feasible points discovered during the search.

    Membership is maintained under three rules: pairwise l-inf distance above
    ``delta_unit``, value within ``eps_pool`` of the best known value, at most
    ``capacity`` members (lowest value evicted first).
    """

    capacity: int
    delta_unit: float
    eps_pool: float
    points: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def nearest_distance(self, x) -> float:
        if not self.points:
            return float("inf")
        return float(min(np.max(np.abs(p - x)) for p in self.points))

    def admit(self, x: np.ndarray, value: float, best: float) -> None:
        if value < best - self.eps_pool:
            return
        for i, p in enumerate(self.points):
            if np.max(np.abs(p - x)) <= self.delta_unit:
                if value > self.values[i]:
                    self.points[i] = x
                    self.values[i] = value
                return
        if len(self.points) >= self.capacity:
            worst = int(np.argmin(self.values))
            if value <= self.values[worst]:
                return
            del self.points[worst], self.values[worst]
        self.points.append(x)
        self.values.append(value)

    def evict_below(self, threshold: float) -> None:
        keep = [i for i, v in enumerate(self.values) if v >= threshold]
        self.points = [self.points[i] for i in keep]
        self.values = [self.values[i] for i in keep]


@dataclass(frozen=True)
class GlobalResult:
    status: GlobalStatus
    best_value: float
    best_point: Optional[np.ndarray]
    global_ub: float
    pool: SolutionPool
    nodes_explored: int
    elapsed: float
    notes: tuple = ()


def verify_certificate(
    H: FactorMatrix, x, tol: Tolerances | None = None
) -> bool:
    """Independently validate a scatteredness violation certificate.

    True iff H'x >= -eps_feas componentwise, |e'x - 1| <= eps_feas, and the
    squared norm reaches stop_threshold; trusts nothing but arithmetic.
    """
    tol = tol or DEFAULT_TOLERANCES
    x = np.asarray(x, dtype=float)
    if x.shape != (H.r,):
        raise ValueError(f"certificate must have dimension {H.r}, got {x.shape}")
    if np.any(H.entries.T @ x < -tol.eps_feas):
        return False
    if abs(float(x.sum()) - 1.0) > tol.eps_feas:
        return False
    return float(x @ x) >= tol.stop_threshold


def _unit_seeds(polytope: Polytope, eps: float):
    """Feasible unit vectors inside the polytope's box, with value one."""
    seeds = []
    r = polytope.dim
    for i in range(r):
        e = np.zeros(r)
        e[i] = 1.0
        if polytope.contains(e, eps):
            seeds.append(e)
    return seeds


def _search(
    polytope: Polytope,
    tol: Tolerances,
    *,
    mode: str,
    stop_value: float,
    deadline: float,
    pool_capacity: int,
    workers: int = 1,
    node_cap: int = DEFAULT_NODE_CAP,
    lp_stride: int = DEFAULT_LP_STRIDE,
    raise_on_infeasible: bool = True,
) -> GlobalResult:
    if mode not in ("optimize", "pool", "exists"):
        raise ValueError(f"unknown search mode {mode!r}")
    if not (np.all(np.isfinite(polytope.lower)) and np.all(np.isfinite(polytope.upper))):
        raise ValueError("branch-and-bound requires finite boxes")
    start = time.monotonic()
    r = polytope.dim
    pool = SolutionPool(capacity=pool_capacity, delta_unit=tol.delta_unit, eps_pool=tol.eps_pool)
    best = float("-inf")
    best_point: Optional[np.ndarray] = None
    fathom_high = float("-inf")
    notes: list[str] = []

    for seed in _unit_seeds(polytope, tol.eps_feas):
        value = float(seed @ seed)
        if value > best:
            best, best_point = value, seed
        pool.admit(seed, value, best)

    heap: list = []
    seq = 0
    heapq.heappush(heap, (-np.inf, seq, polytope.lower.copy(), polytope.upper.copy(), 0))
    nodes = 0
    status: Optional[GlobalStatus] = None
    batch_high = float("-inf")  # bound over regions in flight at an early exit
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    ctx = BoxLpContext(polytope, tol)

    def process(entry):
        """Pure per-node work: tightening, relaxation LP, value at the LP vertex."""
        _, _, low, high, depth = entry
        box = relax.propagate_box(polytope, low, high, eps_feas=tol.eps_feas)
        if box is None:
            return None
        if lp_stride > 0 and depth % lp_stride == 0:
            box = relax.tighten_box(polytope, box[0], box[1], tol=tol, ctx=ctx)
            if box is None:
                return None
        low, high = box
        try:
            ub, xhat = relax.node_upper_bound(polytope, low, high, tol=tol, ctx=ctx)
        except LpError:
            # ill-conditioned node LP: fall back to the box-only secant bound
            # (exact at corners, hence sound) and let the children retry
            ub = float(np.maximum(low * low, high * high).sum())
            xhat = None
        if ub == float("-inf"):
            return None
        return low, high, depth, ub, xhat, None if xhat is None else float(xhat @ xhat)

    try:
        while heap:
            if time.monotonic() - start > deadline:
                status = GlobalStatus.DEADLINE
                notes.append("deadline reached")
                break
            if nodes >= node_cap:
                status = GlobalStatus.DEADLINE
                notes.append(f"node cap {node_cap} reached")
                break
            batch = [heapq.heappop(heap) for _ in range(min(max(workers, 1), len(heap)))]
            # pure bounding work may run in parallel; commits stay ordered
            if executor is not None and len(batch) > 1:
                results = list(executor.map(process, batch))
            else:
                results = [process(entry) for entry in batch]
            for entry, result in zip(batch, results):
                nodes += 1
                if result is None:
                    continue  # node infeasible
                low, high, depth, ub, xhat, value = result
                if xhat is not None:
                    if value > best:
                        best, best_point = value, xhat
                        pool.evict_below(best - tol.eps_pool)
                    pool.admit(xhat, value, best)
                    if best >= stop_value:
                        status = GlobalStatus.THRESHOLD_EXCEEDED
                        break
                # fathoming by bound
                if mode == "optimize":
                    fathomed = ub <= best + tol.eps_gap
                elif mode == "pool":
                    fathomed = ub < best - tol.eps_pool
                else:  # exists
                    fathomed = ub < stop_value
                if fathomed:
                    fathom_high = max(fathom_high, ub)
                    continue
                widths = high - low
                if float(widths.max()) <= tol.delta_unit:
                    # any point of the box is within the pool's resolution of
                    # the evaluated vertex; the secant gap is O(delta^2)
                    fathom_high = max(fathom_high, ub)
                    continue
                if xhat is None:
                    i = int(np.argmax(widths))
                else:
                    gaps = (high - xhat) * (xhat - low)
                    i = int(np.argmax(gaps))
                    if gaps[i] <= 1e-14:
                        i = int(np.argmax(widths))
                w = widths[i]
                at = 0.5 * (low[i] + high[i]) if xhat is None else xhat[i]
                split = float(np.clip(at, low[i] + 0.1 * w, high[i] - 0.1 * w))
                for child_low, child_high in (
                    (low, _replace_at(high, i, split)),
                    (_replace_at(low, i, split), high),
                ):
                    seq += 1
                    heapq.heappush(heap, (-ub, seq, child_low, child_high, depth + 1))
            if status is not None:
                break
    finally:
        if executor is not None:
            executor.shutdown(wait=False)

    frontier_ub = max((-h[0] for h in heap), default=float("-inf"))
    if status is None:
        status = GlobalStatus.CONVERGED
        global_ub = max(best, fathom_high)
    else:
        global_ub = max(best, fathom_high, frontier_ub)
    if status is GlobalStatus.CONVERGED and best == float("-inf"):
        if raise_on_infeasible:
            raise InfeasiblePolytopeError("no feasible point found in the polytope")
        global_ub = float("-inf")
    return GlobalResult(
        status=status,
        best_value=best,
        best_point=best_point,
        global_ub=global_ub,
        pool=pool,
        nodes_explored=nodes,
        elapsed=time.monotonic() - start,
        notes=tuple(notes),
    )


def _replace_at(vec: np.ndarray, i: int, value: float) -> np.ndarray:
    out = vec.copy()
    out[i] = value
    return out


def maximize_norm(
    polytope: Polytope,
    tol: Tolerances | None = None,
    deadline: float = DEFAULT_DEADLINE,
    *,
    pool_mode: bool = False,
    workers: int = 1,
    node_cap: int = DEFAULT_NODE_CAP,
    lp_stride: int = DEFAULT_LP_STRIDE,
) -> GlobalResult:
    """Globally maximize sum(x_i^2) over the polytope.

    Stops with THRESHOLD_EXCEEDED as soon as the incumbent reaches
    ``tol.stop_threshold`` (the witness lands in the pool), with CONVERGED when
    the bound gap closes below ``tol.eps_gap`` (in pool mode: when every node
    that could still hold a point within ``eps_pool`` of the incumbent has
    been refined away), or with DEADLINE when time or the node budget runs
    out, in which case both bounds are still reported.
    """
    tol = tol or DEFAULT_TOLERANCES
    return _search(
        polytope,
        tol,
        mode="pool" if pool_mode else "optimize",
        stop_value=tol.stop_threshold,
        deadline=deadline,
        pool_capacity=polytope.dim + 1,
        workers=workers,
        node_cap=node_cap,
        lp_stride=lp_stride,
    )


def exists_above(
    polytope: Polytope,
    target: float,
    tol: Tolerances | None = None,
    deadline: float = DEFAULT_DEADLINE,
    *,
    workers: int = 1,
    node_cap: int = DEFAULT_NODE_CAP,
    lp_stride: int = DEFAULT_LP_STRIDE,
) -> GlobalResult:
    """Decide whether the polytope holds a point with squared norm >= target.

    THRESHOLD_EXCEEDED means yes (witness = best_point); CONVERGED means no
    point reaches the target; DEADLINE is inconclusive.  An empty polytope
    counts as a no.
    """
    tol = tol or DEFAULT_TOLERANCES
    return _search(
        polytope,
        tol,
        mode="exists",
        stop_value=target,
        deadline=deadline,
        pool_capacity=polytope.dim + 1,
        workers=workers,
        node_cap=node_cap,
        lp_stride=lp_stride,
        raise_on_infeasible=False,
    )
