"""Cholesky solver with ridge escalation for small PSD systems."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairnet.linsolve import (
    DenseSystem,
    SingularSystemError,
    auto_ridge,
    residual_norm,
    solve_spd,
)


class TestDenseSystem:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            DenseSystem(np.array([[1.0, 2.0], [0.0, 1.0]]), np.zeros(2))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError, match="square"):
            DenseSystem(np.zeros((2, 3)), np.zeros(2))
        with pytest.raises(ValueError, match="square"):
            DenseSystem(np.zeros((1, 1)), np.zeros(1))
        with pytest.raises(ValueError, match="shape"):
            DenseSystem(np.eye(3), np.zeros(2))

    def test_tolerates_roundoff_asymmetry(self):
        G = np.array([[2.0, 1.0], [1.0 + 1e-14, 2.0]])
        DenseSystem(G, np.zeros(2))  # must not raise


class TestSolve:
    def test_identity_system(self):
        r = np.array([3.0, -1.0, 2.0])
        p, diag = solve_spd(DenseSystem(np.eye(3), r), ridge=0.0)
        np.testing.assert_array_equal(p, r)
        assert diag.escalations == 0 and not diag.escalated
        assert diag.ridge == 0.0

    def test_hand_solved_2x2(self):
        system = DenseSystem(np.array([[4.0, 2.0], [2.0, 3.0]]), np.array([10.0, 8.0]))
        p, diag = solve_spd(system, ridge=0.0)
        np.testing.assert_allclose(p, [7.0 / 4.0, 3.0 / 2.0], rtol=1e-14)
        np.testing.assert_allclose(system.G @ p, system.r, rtol=1e-14)
        assert diag.residual <= 1e-12

    def test_singular_rank_one_escalates(self):
        """An exactly rank-1 Gram is only solvable after ridge escalation."""
        system = DenseSystem(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([2.0, 2.0]))
        p, diag = solve_spd(system, ridge=0.0)
        assert diag.escalated and diag.escalations >= 1
        assert diag.ridge > 0.0
        np.testing.assert_allclose(p, [1.0, 1.0], atol=1e-6)  # ridge bias is tiny
        assert residual_norm(system.G + diag.ridge * np.eye(2), p, system.r) <= 1e-10

    def test_escalation_walks_the_ladder(self):
        system = DenseSystem(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([2.0, 2.0]))
        p, diag = solve_spd(system, ridge=0.0)
        floor = auto_ridge(system.G)
        # final ridge is floor * 10^k for the k-th escalation
        ratio = diag.ridge / floor
        assert ratio == pytest.approx(10.0 ** (diag.escalations - 1), rel=1e-12)

    def test_hopeless_system_raises(self):
        with pytest.raises(SingularSystemError):
            solve_spd(DenseSystem(np.zeros((2, 2)), np.array([1.0, 0.0])))

    def test_cap_reached_raises(self):
        # A negative-definite block stays non-PD at every allowed ridge:
        # trace is tiny, so the cap is far below the needed shift.
        G = np.array([[1e-12, 0.0], [0.0, -1.0]])
        G = (G + G.T) / 2
        with pytest.raises(SingularSystemError, match="cap"):
            solve_spd(DenseSystem(G, np.ones(2)), ridge=0.0)

    def test_auto_ridge_default(self):
        G = np.diag([2.0, 4.0])
        assert auto_ridge(G) == pytest.approx(1e-10 * 6.0 / 2)
        p, diag = solve_spd(DenseSystem(G, np.array([2.0, 4.0])))  # ridge=None
        assert diag.ridge == pytest.approx(auto_ridge(G))
        np.testing.assert_allclose(p, [1.0, 1.0], rtol=1e-9)

    def test_negative_ridge_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            solve_spd(DenseSystem(np.eye(2), np.zeros(2)), ridge=-1.0)

    def test_bitwise_deterministic(self, rng):
        A = rng.normal(size=(6, 6))
        system = DenseSystem(A @ A.T + np.eye(6), rng.normal(size=6))
        p1, d1 = solve_spd(system)
        p2, d2 = solve_spd(system)
        assert np.array_equal(p1, p2)
        assert d1 == d2

    @settings(max_examples=40)
    @given(seed=st.integers(0, 10**6), d=st.integers(2, 10))
    def test_positive_definite_property(self, seed, d):
        """On well-conditioned SPD systems the exact solution is recovered."""
        gen = np.random.default_rng(seed)
        A = gen.normal(size=(d, d))
        G = A @ A.T + d * np.eye(d)
        r = gen.normal(size=d)
        p, diag = solve_spd(DenseSystem(G, r), ridge=0.0)
        expected = np.linalg.solve(G, r)
        np.testing.assert_allclose(p, expected, rtol=1e-8, atol=1e-10)
        assert diag.escalations == 0


class TestResidualNorm:
    def test_matches_triple_loop_oracle(self, rng):
        d = 7
        G = rng.normal(size=(d, d))
        p = rng.normal(size=d)
        r = rng.normal(size=d)
        acc = 0.0
        for i in range(d):
            row = 0.0
            for j in range(d):
                row += G[i, j] * p[j]
            acc += (row - r[i]) ** 2
        assert residual_norm(G, p, r) == pytest.approx(np.sqrt(acc), rel=1e-12)

    def test_shape_checks(self):
        with pytest.raises(ValueError, match="shape"):
            residual_norm(np.eye(3), np.zeros(2), np.zeros(3))
