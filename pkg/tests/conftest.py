import itertools

import hypothesis
import numpy as np
import pytest

from sscheck import FactorMatrix

hypothesis.settings.register_profile(
    "ci", max_examples=30, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("ci")


def brute_force_vertices(normals, lower, upper, sum_to_one=True, tol=1e-9):
    """Reference vertex enumeration, kept deliberately naive and separate from
    the package: one small linear solve per constraint subset, no batching."""
    normals = np.asarray(normals, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    r = normals.shape[1]
    rows = [(a, 0.0) for a in normals]
    rows += [(e, lower[j]) for j, e in enumerate(np.eye(r))]
    rows += [(-e, -upper[j]) for j, e in enumerate(np.eye(r))]
    base = [(np.ones(r), 1.0)] if sum_to_one else []
    pick = r - len(base)
    verts = []
    for combo in itertools.combinations(rows, pick):
        mat = np.array([row[0] for row in base] + [row[0] for row in combo])
        rhs = np.array([row[1] for row in base] + [row[1] for row in combo])
        if np.linalg.matrix_rank(mat, tol=1e-10) < r:
            continue
        try:
            x = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError:
            continue
        if sum_to_one and abs(x.sum() - 1.0) > tol:
            continue
        if np.any(normals @ x < -tol):
            continue
        if np.any(x < lower - tol) or np.any(x > upper + tol):
            continue
        if not any(np.max(np.abs(x - v)) <= 1e-7 for v in verts):
            verts.append(x)
    return verts


def random_k_sparse(r, n, k, seed):
    """Test-local instance generator (independent of sscheck.synth)."""
    rng = np.random.default_rng(seed)
    cols = np.zeros((r, n))
    for j in range(n):
        support = rng.choice(r, size=k, replace=False)
        weights = rng.exponential(size=k)
        cols[support, j] = weights / weights.sum()
    return cols


@pytest.fixture
def identity3():
    return FactorMatrix(np.eye(3))


@pytest.fixture
def allpairs3():
    return FactorMatrix(np.ones((3, 3)) - np.eye(3))
