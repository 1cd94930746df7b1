"""Core geometric types shared by every check: factor matrices, the feasible
polytope of the norm-maximization formulations, tolerances, and second-order
cone membership."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "FactorMatrix",
    "UnitVector",
    "Polytope",
    "second_order_cone_member",
    "build_polytope",
]


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances used across all modules.

    eps_feas       additive slack for constraint feasibility
    eps_gap        relative bound gap for declaring global optimality
    stop_threshold squared-norm value above which scatteredness is refuted
    eps_pool       admission band below the incumbent for near-optimal points
    delta_unit     l-inf radius for identifying a point with a unit vector
    """

    eps_feas: float = 1e-9
    eps_gap: float = 1e-6
    stop_threshold: float = 1.0001
    eps_pool: float = 1e-6
    delta_unit: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("eps_feas", "eps_gap", "stop_threshold", "eps_pool", "delta_unit"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.stop_threshold > 1.0:
            raise ValueError("stop_threshold must exceed 1")


DEFAULT_TOLERANCES = Tolerances()


class FactorMatrix:
    """A nonnegative r x n matrix whose column cone is tested for scatteredness.

    Construction validates nonnegativity (reporting the first offending entry),
    drops all-zero columns with a warning (they span nothing), and rescales the
    remaining columns to unit 1-norm: the column cone is invariant under
    positive column scaling and normalization keeps the LPs well conditioned.
    Instances are immutable and safe to share across concurrent checks.
    """

    __slots__ = ("_entries", "_dropped_columns")

    def __init__(self, entries, *, normalize: bool = True):
        arr = np.array(entries, dtype=float, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"matrix must be 2-dimensional, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError(
                f"factorization rank r must be at least 2, got r={arr.shape[0]}"
            )
        if not np.all(np.isfinite(arr)):
            i, j = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"non-finite entry at row {i}, column {j}")
        if np.any(arr < 0.0):
            i, j = np.argwhere(arr < 0.0)[0]
            raise ValueError(
                f"negative entry {arr[i, j]!r} at row {i}, column {j}; "
                "the matrix must be componentwise nonnegative"
            )
        col_sums = arr.sum(axis=0)
        zero_cols = np.flatnonzero(col_sums == 0.0)
        if zero_cols.size:
            warnings.warn(
                f"dropping {zero_cols.size} all-zero column(s) at indices "
                f"{zero_cols.tolist()}",
                stacklevel=2,
            )
            arr = np.delete(arr, zero_cols, axis=1)
            col_sums = np.delete(col_sums, zero_cols)
        if arr.shape[1] < 1:
            raise ValueError("matrix must keep at least one nonzero column")
        if normalize:
            arr = arr / col_sums
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self._entries = arr
        self._dropped_columns = tuple(int(j) for j in zero_cols)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def r(self) -> int:
        return self._entries.shape[0]

    @property
    def n(self) -> int:
        return self._entries.shape[1]

    @property
    def dropped_columns(self) -> tuple[int, ...]:
        """Indices (in the input) of all-zero columns removed at construction."""
        return self._dropped_columns

    def __repr__(self) -> str:
        return f"FactorMatrix(r={self.r}, n={self.n})"


@dataclass(frozen=True)
class UnitVector:
    """The i-th coordinate vector e_i in dimension r."""

    index: int
    dimension: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < self.dimension:
            raise ValueError(f"index {self.index} out of range for dimension {self.dimension}")

    @property
    def array(self) -> np.ndarray:
        v = np.zeros(self.dimension)
        v[self.index] = 1.0
        return v


def second_order_cone_member(
    x, *, dual: bool = False, eps_feas: float = DEFAULT_TOLERANCES.eps_feas
) -> bool:
    """Membership test for the second-order cone e'x >= sqrt(r-1) ||x||_2.

    With ``dual=True`` the coefficient drops to 1, which tests the dual cone
    e'x >= ||x||_2 instead.  Requires dimension r >= 2 (for r = 2 the two cones
    coincide).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"expected a vector of dimension >= 2, got shape {x.shape}")
    coeff = 1.0 if dual else math.sqrt(x.size - 1)
    return float(x.sum()) >= coeff * float(np.linalg.norm(x)) - eps_feas


@dataclass(frozen=True)
class Polytope:
    """The feasible set {x : e'x = 1, N x >= 0, lower <= x <= upper}.

    ``normals`` holds one constraint normal per row (semantics N x >= 0); for a
    factor matrix H it is H transposed, so the rows are nonnegative.  Bound
    entries may be -inf/+inf in general, but the builders always install finite
    boxes so the set is representable for branch-and-bound.
    """

    normals: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    sum_constraint: bool = True

    def __post_init__(self) -> None:
        normals = np.ascontiguousarray(np.asarray(self.normals, dtype=float))
        lower = np.ascontiguousarray(np.asarray(self.lower, dtype=float))
        upper = np.ascontiguousarray(np.asarray(self.upper, dtype=float))
        if normals.ndim != 2:
            raise ValueError("normals must be a 2-d array")
        r = normals.shape[1]
        if lower.shape != (r,) or upper.shape != (r,):
            raise ValueError("bound vectors must match the variable dimension")
        if np.any(normals < 0.0):
            raise ValueError(
                "constraint normals must be nonnegative (rows of H transposed); "
                "unit vectors would otherwise be infeasible"
            )
        finite = np.isfinite(lower) & np.isfinite(upper)
        if np.any(lower[finite] > upper[finite]):
            raise ValueError("lower bound exceeds upper bound")
        normals.flags.writeable = False
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def n_rows(self) -> int:
        return self.normals.shape[0]

    def with_box(self, lower, upper) -> "Polytope":
        """Intersect the box with [lower, upper]; rows are unchanged."""
        return Polytope(
            normals=self.normals,
            lower=np.maximum(self.lower, np.asarray(lower, dtype=float)),
            upper=np.minimum(self.upper, np.asarray(upper, dtype=float)),
            sum_constraint=self.sum_constraint,
        )

    def contains(self, x, eps_feas: float = DEFAULT_TOLERANCES.eps_feas) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError("dimension mismatch")
        if self.sum_constraint and abs(float(x.sum()) - 1.0) > eps_feas:
            return False
        if np.any(self.normals @ x < -eps_feas):
            return False
        return bool(np.all(x >= self.lower - eps_feas) and np.all(x <= self.upper + eps_feas))


def build_polytope(H: FactorMatrix, *, bounded: bool = True) -> Polytope:
    """Feasible set of the norm-maximization formulations for ``H``.

    ``bounded=True`` installs the box [-1, 1]^r of the box-constrained
    formulation.  ``bounded=False`` corresponds to the formulation without
    explicit bounds; when H passes the necessary condition every feasible x
    satisfies 2-r <= x_i <= 1, so that analytic box is installed instead and
    the set stays representable.
    """
    r = H.r
    if bounded:
        lower = -np.ones(r)
    else:
        lower = np.full(r, float(2 - r))
    return Polytope(normals=H.entries.T, lower=lower, upper=np.ones(r))
