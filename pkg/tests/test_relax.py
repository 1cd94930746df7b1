import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sscheck import (
    FactorMatrix,
    build_polytope,
    node_upper_bound,
    propagate_box,
    secant_overestimator,
    tighten_box,
)

from conftest import random_k_sparse


class TestSecantOverestimator:
    def test_symmetric_box(self):
        b = secant_overestimator(-np.ones(4), np.ones(4))
        assert np.array_equal(b.slope, np.zeros(4))
        assert b.offset == 4.0

    def test_unit_box(self):
        b = secant_overestimator(np.zeros(3), np.ones(3))
        assert np.array_equal(b.slope, np.ones(3))
        assert b.offset == 0.0
        # tight at 0/1 corners
        for corner in ([0, 0, 0], [1, 0, 1], [1, 1, 1]):
            x = np.array(corner, dtype=float)
            assert b(x) == pytest.approx(float(x @ x))

    def test_single_interval(self):
        b = secant_overestimator(np.array([2.0]), np.array([6.0]))
        assert b.slope[0] == 8.0
        assert b.offset == -12.0
        assert b(np.array([2.0])) == pytest.approx(4.0)
        assert b(np.array([6.0])) == pytest.approx(36.0)

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError, match="coordinate 0"):
            secant_overestimator(np.array([1.0]), np.array([0.0]))

    def test_infinite_bounds_rejected(self):
        with pytest.raises(ValueError):
            secant_overestimator(np.array([-np.inf]), np.array([1.0]))

    @given(st.integers(0, 1000))
    @settings(max_examples=50)
    def test_soundness_random_boxes(self, seed):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(1, 7))
        l = rng.uniform(-3, 2, size=r)
        u = l + rng.uniform(0, 3, size=r)
        b = secant_overestimator(l, u)
        for _ in range(20):
            x = rng.uniform(l, u)
            assert float(x @ x) <= b(x) + 1e-9

    def test_gap_bound_and_quartering(self):
        # per-coordinate gap is at most (u-l)^2/4 and the midpoint split
        # quarters that worst case
        rng = np.random.default_rng(5)
        for _ in range(50):
            l, w = rng.uniform(-2, 2), rng.uniform(0.01, 3)
            u = l + w
            xs = np.linspace(l, u, 33)
            gap = max((l + u) * x - l * u - x * x for x in xs)
            assert gap <= w * w / 4 + 1e-12
            mid = (l + u) / 2
            for a, b_ in ((l, mid), (mid, u)):
                xs = np.linspace(a, b_, 17)
                half_gap = max((a + b_) * x - a * b_ - x * x for x in xs)
                assert half_gap <= (w / 2) ** 2 / 4 + 1e-12


class TestNodeUpperBound:
    def test_identity_raw_box_is_loose(self, identity3):
        P = build_polytope(identity3)
        ub, xhat = node_upper_bound(P, -np.ones(3), np.ones(3))
        assert ub == pytest.approx(3.0, abs=1e-8)
        assert xhat is not None

    def test_identity_tightened_box_is_exact(self, identity3):
        P = build_polytope(identity3)
        l, u = tighten_box(P, -np.ones(3), np.ones(3))
        assert np.allclose(l, 0.0, atol=1e-8)
        assert np.allclose(u, 1.0, atol=1e-8)
        ub, xhat = node_upper_bound(P, l, u)
        assert ub == pytest.approx(1.0, abs=1e-8)

    def test_infeasible_node(self, identity3):
        P = build_polytope(identity3)
        ub, xhat = node_upper_bound(P, np.full(3, 0.6), np.ones(3))
        assert ub == -np.inf and xhat is None

    def test_allpairs_bound_reaches_truth(self, allpairs3):
        P = build_polytope(allpairs3)
        assert P.contains(np.array([-1.0, 1.0, 1.0]))
        ub, _ = node_upper_bound(P, P.lower, P.upper)
        assert ub >= 3.0 - 1e-9


class TestBoxTightening:
    @given(st.integers(0, 400))
    @settings(max_examples=40)
    def test_propagation_never_removes_feasible_points(self, seed):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(2, 6))
        n = int(rng.integers(2, 10))
        H = FactorMatrix(random_k_sparse(r, n, int(rng.integers(1, r)), seed) + 1e-12)
        P = build_polytope(H)
        # random feasible points: convex combinations of unit vectors
        weights = rng.dirichlet(np.ones(r), size=30)
        box = propagate_box(P, P.lower, P.upper)
        assert box is not None
        l, u = box
        for x in weights:
            assert P.contains(x)
            assert np.all(x >= l - 1e-7) and np.all(x <= u + 1e-7)

    def test_propagation_detects_empty(self, identity3):
        P = build_polytope(identity3)
        assert propagate_box(P, np.full(3, 0.6), np.ones(3)) is None

    def test_propagation_collapses_identity_cap(self, identity3):
        # once x_1 is pinned near 1, the sum constraint plus the sign rows
        # squeeze every other coordinate into [0, w]
        P = build_polytope(identity3)
        l, u = propagate_box(P, np.array([0.9, -1.0, -1.0]), np.ones(3))
        assert np.all(l >= -1e-9)
        assert u[1] <= 0.1 + 1e-8 and u[2] <= 0.1 + 1e-8

    @given(st.integers(0, 400))
    @settings(max_examples=25)
    def test_lp_tightening_never_removes_feasible_points(self, seed):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(2, 5))
        n = int(rng.integers(2, 9))
        H = FactorMatrix(random_k_sparse(r, n, int(rng.integers(1, r)), seed) + 1e-12)
        P = build_polytope(H)
        box = tighten_box(P, P.lower, P.upper)
        assert box is not None
        l, u = box
        for x in rng.dirichlet(np.ones(r), size=20):
            assert np.all(x >= l - 1e-7) and np.all(x <= u + 1e-7)

    def test_lp_tightening_detects_empty(self, identity3):
        P = build_polytope(identity3)
        assert tighten_box(P, np.full(3, 0.6), np.ones(3)) is None
