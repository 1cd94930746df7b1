import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sscheck import (
    FactorMatrix,
    Polytope,
    Tolerances,
    UnitVector,
    build_polytope,
    second_order_cone_member,
)


class TestTolerances:
    def test_defaults(self):
        tol = Tolerances()
        assert tol.eps_feas == 1e-9
        assert tol.eps_gap == 1e-6
        assert tol.stop_threshold == 1.0001
        assert tol.eps_pool == 1e-6
        assert tol.delta_unit == 1e-6

    @pytest.mark.parametrize("field", ["eps_feas", "eps_gap", "eps_pool", "delta_unit"])
    def test_rejects_nonpositive(self, field):
        with pytest.raises(ValueError):
            Tolerances(**{field: 0.0})

    def test_stop_threshold_must_exceed_one(self):
        with pytest.raises(ValueError):
            Tolerances(stop_threshold=1.0)


class TestFactorMatrix:
    def test_negative_entry_rejected_with_location(self):
        bad = np.ones((3, 4))
        bad[1, 2] = -0.5
        with pytest.raises(ValueError, match="row 1, column 2"):
            FactorMatrix(bad)

    def test_rank_one_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            FactorMatrix(np.ones((1, 5)))

    def test_zero_column_dropped_with_warning(self):
        H = np.eye(3)
        H = np.concatenate([H, np.zeros((3, 1))], axis=1)
        with pytest.warns(UserWarning, match="all-zero column"):
            fm = FactorMatrix(H)
        assert fm.n == 3
        assert fm.dropped_columns == (3,)

    def test_all_columns_zero_rejected(self):
        with pytest.raises(ValueError):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                FactorMatrix(np.zeros((3, 2)))

    def test_columns_normalized_to_unit_1norm(self):
        fm = FactorMatrix(np.array([[2.0, 0.0], [2.0, 5.0]]))
        assert np.allclose(fm.entries.sum(axis=0), 1.0)

    def test_immutable(self, identity3):
        with pytest.raises(ValueError):
            identity3.entries[0, 0] = 7.0


class TestSecondOrderCone:
    def test_all_ones_inside(self):
        assert second_order_cone_member(np.ones(3))  # e'e = 3 >= sqrt(2)*sqrt(3)

    @pytest.mark.parametrize("r", [2, 3, 5, 9])
    def test_e_minus_ei_on_boundary(self, r):
        # e'(e - e_i) and sqrt(r-1)*||e - e_i|| both equal r - 1
        x = np.ones(r)
        x[0] = 0.0
        assert abs(x.sum() - math.sqrt(r - 1) * np.linalg.norm(x)) < 1e-12
        assert second_order_cone_member(x)

    def test_dual_cone_rejects_difference_of_units(self):
        assert not second_order_cone_member(np.array([1.0, -1.0]), dual=True)

    def test_dimension_one_rejected(self):
        with pytest.raises(ValueError):
            second_order_cone_member(np.array([1.0]))

    @given(st.integers(2, 8), st.integers(0, 10_000))
    def test_members_are_nonnegative(self, r, seed):
        # the cone sits inside the nonnegative orthant: sampled members never
        # have a meaningfully negative coordinate
        rng = np.random.default_rng(seed)
        x = np.ones(r) + rng.normal(scale=0.6, size=r)
        if second_order_cone_member(x, eps_feas=0.0):
            assert x.min() >= -1e-9

    def test_r2_cones_coincide(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.normal(size=2)
            assert second_order_cone_member(x, eps_feas=0.0) == second_order_cone_member(
                x, dual=True, eps_feas=0.0
            )


class TestUnitVector:
    def test_array(self):
        assert np.array_equal(UnitVector(1, 3).array, [0.0, 1.0, 0.0])

    def test_bounds(self):
        with pytest.raises(ValueError):
            UnitVector(3, 3)


class TestBuildPolytope:
    def test_bounded_box(self, identity3):
        P = build_polytope(identity3, bounded=True)
        assert np.array_equal(P.lower, -np.ones(3))
        assert np.array_equal(P.upper, np.ones(3))
        assert P.sum_constraint
        assert np.array_equal(P.normals, np.eye(3) / 1.0)

    def test_unbounded_form_gets_analytic_box_r3(self, allpairs3):
        # 2 - r = -1 for r = 3: same box as the bounded formulation
        P = build_polytope(allpairs3, bounded=False)
        assert np.array_equal(P.lower, -np.ones(3))

    def test_unbounded_form_gets_analytic_box_r5(self):
        H = FactorMatrix(np.ones((5, 5)) - np.eye(5))
        P = build_polytope(H, bounded=False)
        assert np.array_equal(P.lower, np.full(5, -3.0))
        assert np.array_equal(P.upper, np.ones(5))

    def test_unit_vectors_always_feasible(self):
        rng = np.random.default_rng(3)
        H = FactorMatrix(rng.uniform(size=(4, 9)))
        P = build_polytope(H)
        for i in range(4):
            e = np.zeros(4)
            e[i] = 1.0
            assert P.contains(e)

    def test_negative_normals_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            Polytope(normals=np.array([[1.0, -1.0]]), lower=-np.ones(2), upper=np.ones(2))

    def test_with_box_intersects(self, identity3):
        P = build_polytope(identity3)
        Q = P.with_box(np.full(3, -5.0), np.full(3, 0.5))
        assert np.array_equal(Q.lower, -np.ones(3))
        assert np.array_equal(Q.upper, np.full(3, 0.5))

    def test_crossed_bounds_rejected(self, identity3):
        with pytest.raises(ValueError, match="exceeds"):
            Polytope(normals=identity3.entries.T, lower=np.ones(3), upper=np.zeros(3))
