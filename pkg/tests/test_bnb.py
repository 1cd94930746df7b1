import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sscheck import (
    FactorMatrix,
    GlobalStatus,
    InfeasiblePolytopeError,
    Tolerances,
    build_polytope,
    exact_max_norm,
    exists_above,
    maximize_norm,
    verify_certificate,
)
from sscheck.bnb import SolutionPool, _search

from conftest import random_k_sparse


def as_sorted_tuples(points, digits=6):
    return sorted(tuple(np.round(p, digits)) for p in points)


class TestVerifyCertificate:
    def test_allpairs_witness(self, allpairs3):
        # H'x for x = (-1,1,1) is (2,0,0)/scale >= 0, e'x = 1, |x|^2 = 3
        assert verify_certificate(allpairs3, np.array([-1.0, 1.0, 1.0]))

    def test_unit_vector_fails_threshold(self, identity3):
        assert not verify_certificate(identity3, np.array([1.0, 0.0, 0.0]))

    def test_infeasible_point_rejected(self, identity3):
        assert not verify_certificate(identity3, np.array([2.0, -0.5, -0.5]))

    def test_sum_violation_rejected(self, allpairs3):
        assert not verify_certificate(allpairs3, np.array([-1.0, 1.0, 1.5]))

    def test_dimension_mismatch(self, identity3):
        with pytest.raises(ValueError):
            verify_certificate(identity3, np.ones(4))


class TestMaximizeNorm:
    def test_identity_converges_to_units(self, identity3):
        res = maximize_norm(build_polytope(identity3))
        assert res.status is GlobalStatus.CONVERGED
        assert res.best_value == pytest.approx(1.0, abs=1e-9)
        assert res.global_ub <= 1.0 + 1e-6
        assert as_sorted_tuples(res.pool.points) == as_sorted_tuples(np.eye(3))

    def test_allpairs_stops_at_threshold(self, allpairs3):
        res = maximize_norm(build_polytope(allpairs3))
        assert res.status is GlobalStatus.THRESHOLD_EXCEEDED
        # every vertex of this polytope has squared norm 3, so the witness
        # lands there, far above the stop threshold
        assert res.best_value >= 3.0 - 1e-6
        assert verify_certificate(allpairs3, res.best_point)
        assert any(np.allclose(p, res.best_point) for p in res.pool.points)

    def test_mixed_pool_is_exactly_units(self):
        H = FactorMatrix(np.concatenate([np.eye(3), np.ones((3, 3)) - np.eye(3)], axis=1))
        res = maximize_norm(build_polytope(H), pool_mode=True)
        assert res.status is GlobalStatus.CONVERGED
        assert res.best_value == pytest.approx(1.0, abs=1e-9)
        assert as_sorted_tuples(res.pool.points) == as_sorted_tuples(np.eye(3))

    def test_deadline_status(self):
        H = FactorMatrix(random_k_sparse(6, 30, 3, 11) + 1e-12)
        res = maximize_norm(build_polytope(H), deadline=0.0)
        assert res.status is GlobalStatus.DEADLINE
        assert res.best_value <= res.global_ub + 1e-9

    def test_node_cap_maps_to_deadline_status(self, identity3):
        H = FactorMatrix(random_k_sparse(5, 25, 3, 3) + 1e-12)
        res = maximize_norm(build_polytope(H), node_cap=1)
        assert res.status is GlobalStatus.DEADLINE
        assert any("node cap" in note for note in res.notes)

    def test_infeasible_polytope_is_an_error(self, identity3):
        P = build_polytope(identity3).with_box(np.full(3, 0.6), np.ones(3))
        with pytest.raises(InfeasiblePolytopeError):
            maximize_norm(P)

    def test_deterministic_single_worker(self):
        H = FactorMatrix(random_k_sparse(5, 20, 2, 17) + 1e-12)
        P = build_polytope(H)
        a = maximize_norm(P)
        b = maximize_norm(P)
        assert a.status == b.status
        assert a.best_value == b.best_value
        assert a.nodes_explored == b.nodes_explored
        assert np.array_equal(a.best_point, b.best_point)

    def test_multi_worker_same_verdict(self):
        H = FactorMatrix(random_k_sparse(5, 25, 3, 23) + 1e-12)
        P = build_polytope(H)
        a = maximize_norm(P, workers=1)
        b = maximize_norm(P, workers=4)
        assert a.status == b.status
        assert a.best_value == pytest.approx(b.best_value, abs=1e-9)

    def test_early_stop_monotonicity(self, allpairs3):
        P = build_polytope(allpairs3)
        low = maximize_norm(P, Tolerances(stop_threshold=1.0001))
        high = maximize_norm(P, Tolerances(stop_threshold=2.5))
        assert low.status is GlobalStatus.THRESHOLD_EXCEEDED
        # raising the threshold never produces a weaker best value
        assert high.best_value >= low.best_value - 1e-9

    @given(st.integers(0, 200))
    @settings(max_examples=12)
    def test_bounds_sound_against_oracle(self, seed):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(3, 5))
        n = int(rng.integers(r, 3 * r))
        H = FactorMatrix(random_k_sparse(r, n, int(rng.integers(1, r)), seed) + 1e-12)
        P = build_polytope(H)
        truth, _ = exact_max_norm(P)
        res = maximize_norm(P)
        assert res.best_value <= truth + 1e-7
        assert truth <= res.global_ub + 1e-7
        if res.status is GlobalStatus.CONVERGED:
            assert res.best_value == pytest.approx(truth, abs=1e-5)

    @given(st.integers(0, 200))
    @settings(max_examples=8)
    def test_pool_subset_of_vertices(self, seed):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(3, 5))
        n = int(rng.integers(r, 2 * r))
        H = FactorMatrix(random_k_sparse(r, n, int(rng.integers(1, r)), seed) + 1e-12)
        P = build_polytope(H)
        res = maximize_norm(P, pool_mode=True, deadline=60.0)
        if res.status is GlobalStatus.DEADLINE:
            return
        from sscheck import enumerate_vertices

        verts = enumerate_vertices(P).vertices
        for p in res.pool.points:
            assert min(np.max(np.abs(p - v)) for v in verts) <= 1e-5


class TestExistsAbove:
    def test_finds_thresholded_point(self, allpairs3):
        P = build_polytope(allpairs3)
        res = exists_above(P, 2.5)
        assert res.status is GlobalStatus.THRESHOLD_EXCEEDED
        assert float(res.best_point @ res.best_point) >= 2.5

    def test_certifies_absence(self, identity3):
        P = build_polytope(identity3)
        res = exists_above(P, 1.5)
        assert res.status is GlobalStatus.CONVERGED
        assert res.best_value < 1.5

    def test_empty_region_is_absence(self, identity3):
        P = build_polytope(identity3).with_box(np.full(3, 0.6), np.ones(3))
        res = exists_above(P, 0.5)
        assert res.status is GlobalStatus.CONVERGED


class TestSolutionPool:
    def test_distinctness_and_band(self):
        pool = SolutionPool(capacity=3, delta_unit=1e-6, eps_pool=1e-6)
        a = np.array([1.0, 0.0])
        pool.admit(a, 1.0, best=1.0)
        pool.admit(a + 1e-9, 1.0, best=1.0)  # same point within delta
        assert len(pool) == 1
        pool.admit(np.array([0.0, 1.0]), 1.0 - 5e-7, best=1.0)
        assert len(pool) == 2
        pool.admit(np.array([0.5, 0.5]), 0.4, best=1.0)  # below the band
        assert len(pool) == 2

    def test_eviction_on_better_incumbent(self):
        pool = SolutionPool(capacity=4, delta_unit=1e-6, eps_pool=1e-6)
        pool.admit(np.array([0.6, 0.4]), 0.52, best=0.52)
        pool.admit(np.array([1.0, 0.0]), 1.0, best=1.0)
        pool.evict_below(1.0 - 1e-6)
        assert len(pool) == 1
        assert pool.values == [1.0]

    def test_capacity_keeps_best(self):
        pool = SolutionPool(capacity=2, delta_unit=1e-3, eps_pool=1.0)
        pool.admit(np.array([0.1, 0.9]), 0.82, best=1.0)
        pool.admit(np.array([0.9, 0.1]), 0.82, best=1.0)
        pool.admit(np.array([0.0, 1.0]), 1.0, best=1.0)
        assert len(pool) == 2
        assert max(pool.values) == 1.0
