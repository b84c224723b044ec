import numpy as np
import pytest
from scipy.linalg import solve_continuous_are

from attsafe.errors import CareSolverError
from attsafe.mathcore import (
    CareProblem,
    brunovsky_pair,
    canonicalize_mrp,
    euler321_to_mrp,
    mrp_kinematics_matrix,
    mrp_kinematics_matrix_dot,
    mrp_to_dcm,
    mrp_to_euler321,
    random_orientation,
    skew,
    solve_care,
)

F2 = np.array([[0.0, 1.0], [0.0, 0.0]])
G2 = np.array([[0.0], [1.0]])


class TestKinematicsMatrix:
    def test_origin(self):
        assert np.allclose(mrp_kinematics_matrix(np.zeros(3)), 0.25 * np.eye(3))

    def test_orthogonality_identity(self):
        # M M' = ((1 + s's)/4)^2 I  =>  M is nonsingular everywhere
        rng = np.random.default_rng(0)
        for _ in range(1000):
            s = rng.uniform(-1.5, 1.5, 3)
            M = mrp_kinematics_matrix(s)
            c = ((1.0 + s @ s) / 4.0) ** 2
            assert np.abs(M @ M.T - c * np.eye(3)).max() < 1e-10

    def test_identity_at_table1_attitude(self):
        s = np.array([0.332, -0.614, 0.587])
        M = mrp_kinematics_matrix(s)
        c = ((1.0 + s @ s) / 4.0) ** 2
        assert abs(c - 0.2097) < 5e-4
        assert np.abs(M @ M.T - c * np.eye(3)).max() < 1e-12


class TestKinematicsMatrixDot:
    def test_zero_rate(self):
        assert np.allclose(
            mrp_kinematics_matrix_dot(np.array([0.3, -0.2, 0.5]), np.zeros(3)), 0.0
        )

    def test_origin_pure_rate(self):
        e1 = np.array([1.0, 0.0, 0.0])
        expected = 0.25 * 2.0 * skew(e1)
        assert np.allclose(mrp_kinematics_matrix_dot(np.zeros(3), e1), expected, atol=1e-15)

    def test_matches_central_difference(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(1000):
            s = rng.uniform(-1, 1, 3)
            sd = rng.uniform(-1, 1, 3)
            fd = (mrp_kinematics_matrix(s + h * sd) - mrp_kinematics_matrix(s - h * sd)) / (2 * h)
            assert np.abs(mrp_kinematics_matrix_dot(s, sd) - fd).max() < 1e-8


class TestEulerConversions:
    def test_table1_footnote_value(self):
        sigma = euler321_to_mrp(np.radians([140.0, 20.0, 100.0]))
        assert np.abs(sigma - np.array([0.332, -0.614, 0.587])).max() < 5e-3

    def test_identity(self):
        assert np.allclose(euler321_to_mrp(np.zeros(3)), 0.0)

    def test_pi_principal_rotation(self):
        sigma = euler321_to_mrp(np.radians([180.0, 0.0, 0.0]))
        assert abs(np.linalg.norm(sigma) - 1.0) < 1e-12

    def test_round_trip_same_rotation(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            angles = np.array(
                [rng.uniform(-np.pi, np.pi), rng.uniform(-1.4, 1.4), rng.uniform(-np.pi, np.pi)]
            )
            sigma = euler321_to_mrp(angles)
            back = euler321_to_mrp(mrp_to_euler321(sigma))
            assert np.abs(mrp_to_dcm(back) - mrp_to_dcm(sigma)).max() < 1e-9


class TestRandomOrientation:
    def test_deterministic(self):
        assert np.array_equal(random_orientation(42), random_orientation(42))

    def test_canonical(self):
        for seed in range(500):
            assert np.linalg.norm(random_orientation(seed)) <= 1.0 + 1e-12

    def test_mean_rotation_angle(self):
        # uniform rotations have angle density (1 - cos t)/pi on [0, pi];
        # the mean is pi/2 + 2/pi ~ 126.476 deg
        angles = [4.0 * np.arctan(np.linalg.norm(random_orientation(s))) for s in range(10_000)]
        mean_deg = np.degrees(np.mean(angles))
        assert abs(mean_deg - 126.476) < 2.0


class TestCanonicalize:
    def test_inside_unchanged(self):
        s = np.array([0.3, 0.1, -0.2])
        assert np.array_equal(canonicalize_mrp(s), s)

    def test_shadow_maps_to_same_rotation(self):
        s = np.array([1.2, -0.5, 0.8])
        shadow = canonicalize_mrp(s)
        assert np.linalg.norm(shadow) < 1.0
        assert np.abs(mrp_to_dcm(shadow) - mrp_to_dcm(s)).max() < 1e-12


class TestSolveCare:
    def test_double_integrator_closed_form(self):
        sol = solve_care(CareProblem(F=F2, G=G2, Q=np.eye(2), R=np.eye(1)))
        expected = np.array([[np.sqrt(3.0), 1.0], [1.0, np.sqrt(3.0)]])
        assert np.abs(sol.P - expected).max() < 1e-12
        assert sol.residual_norm <= 1e-9 * 2.0

    def test_block_kronecker_structure(self):
        F, G = brunovsky_pair(3, 2)
        sol = solve_care(CareProblem(F=F, G=G, Q=np.eye(6), R=np.eye(3)))
        expected = np.kron(np.array([[np.sqrt(3.0), 1.0], [1.0, np.sqrt(3.0)]]), np.eye(3))
        assert np.abs(sol.P - expected).max() < 1e-12

    def test_r_scaling_changes_p_residual_stays_small(self):
        F, G = brunovsky_pair(3, 2)
        base = solve_care(CareProblem(F=F, G=G, Q=np.eye(6), R=np.eye(3)))
        scaled = solve_care(CareProblem(F=F, G=G, Q=np.eye(6), R=7.5 * np.eye(3)))
        assert np.abs(base.P - scaled.P).max() > 1e-3
        assert scaled.residual_norm <= 1e-9 * (1.0 + np.sqrt(6.0))

    @pytest.mark.parametrize("seed", range(20))
    def test_random_problems_against_scipy(self, seed):
        rng = np.random.default_rng(seed)
        F, G = brunovsky_pair(3, 2)
        q = rng.uniform(0.2, 3.0, 6)
        Q = np.diag(q)
        A = rng.standard_normal((3, 3))
        R = A @ A.T + 0.5 * np.eye(3)
        sol = solve_care(CareProblem(F=F, G=G, Q=Q, R=R))
        P_ref = solve_continuous_are(F, G, Q, R)
        assert np.abs(sol.P - P_ref).max() < 1e-8 * (1.0 + np.abs(P_ref).max())

    def test_solution_properties(self):
        rng = np.random.default_rng(5)
        F, G = brunovsky_pair(3, 2)
        for _ in range(50):
            Q = np.diag(rng.uniform(0.1, 4.0, 6))
            R = np.diag(rng.uniform(0.1, 10.0, 3))
            sol = solve_care(CareProblem(F=F, G=G, Q=Q, R=R))
            P = sol.P
            assert np.abs(P - P.T).max() <= 1e-12
            assert np.linalg.eigvalsh(P).min() > 0.0
            assert sol.residual_norm <= 1e-9 * (1.0 + np.linalg.norm(Q))
            A_cl = F - G @ np.linalg.solve(R, G.T @ P)
            assert np.linalg.eigvals(A_cl).real.max() < 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            CareProblem(F=F2, G=G2, Q=-np.eye(2), R=np.eye(1))
        with pytest.raises(ValueError):
            CareProblem(F=F2, G=G2, Q=np.eye(2), R=np.zeros((1, 1)))

    def test_unstabilizable_raises(self):
        # integrator chain with no input authority on the second chain
        F = np.zeros((2, 2))
        G = np.array([[1.0], [0.0]])
        with pytest.raises(CareSolverError):
            solve_care(CareProblem(F=F, G=G, Q=np.eye(2), R=np.eye(1)))
