"""Attitude-math primitives and a continuous-time algebraic Riccati solver.

MRPs follow the sigma = tan(Phi/4) * e_hat convention with the shadow set
used only to canonicalize at construction time (never mid-trajectory, so
Lyapunov values stay continuous along a run).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CareSolverError

__all__ = [
    "skew",
    "canonicalize_mrp",
    "mrp_kinematics_matrix",
    "mrp_kinematics_matrix_dot",
    "mrp_to_dcm",
    "euler321_to_mrp",
    "mrp_to_euler321",
    "random_orientation",
    "brunovsky_pair",
    "CareProblem",
    "CareSolution",
    "solve_care",
]


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix [v]x so that skew(v) @ w == cross(v, w)."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def canonicalize_mrp(sigma: np.ndarray) -> np.ndarray:
    """Map to the shadow set when |sigma| > 1 so the canonical norm is <= 1."""
    sigma = np.asarray(sigma, dtype=float)
    n2 = float(sigma @ sigma)
    if n2 > 1.0:
        return -sigma / n2
    return sigma.copy()


def mrp_kinematics_matrix(sigma: np.ndarray) -> np.ndarray:
    """M(sigma) = 1/4 * ((1 - s's) I + 2 [s]x + 2 s s'), with sdot = M(sigma) w."""
    sigma = np.asarray(sigma, dtype=float)
    s2 = float(sigma @ sigma)
    return 0.25 * ((1.0 - s2) * np.eye(3) + 2.0 * skew(sigma) + 2.0 * np.outer(sigma, sigma))


def mrp_kinematics_matrix_dot(sigma: np.ndarray, sigma_dot: np.ndarray) -> np.ndarray:
    """Time derivative of M(sigma(t)) along sigma_dot.

    d/dt M = 1/4 * (-2 (s'sdot) I + 2 [sdot]x + 2 (sdot s' + s sdot')).
    """
    sigma = np.asarray(sigma, dtype=float)
    sigma_dot = np.asarray(sigma_dot, dtype=float)
    sd = float(sigma @ sigma_dot)
    outer = np.outer(sigma_dot, sigma)
    return 0.25 * (-2.0 * sd * np.eye(3) + 2.0 * skew(sigma_dot) + 2.0 * (outer + outer.T))


def mrp_to_dcm(sigma: np.ndarray) -> np.ndarray:
    """Direction cosine matrix for the rotation encoded by sigma.

    Consistent with mrp_kinematics_matrix: for C = mrp_to_dcm(sigma(t)) and
    sigma_dot = M(sigma) w, C maps vectors so that C' v_body is constant for
    a torque-free rigid body (see the dynamics tests).
    """
    sigma = np.asarray(sigma, dtype=float)
    s2 = float(sigma @ sigma)
    S = skew(sigma)
    return np.eye(3) + (8.0 * S @ S - 4.0 * (1.0 - s2) * S) / (1.0 + s2) ** 2


def _rot1(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def _rot2(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def _rot3(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def dcm_to_quat(C: np.ndarray) -> np.ndarray:
    """Scalar-first unit quaternion from a DCM (Sheppard's method, q0 >= 0)."""
    tr = np.trace(C)
    b2 = np.array(
        [1.0 + tr, 1.0 + 2.0 * C[0, 0] - tr, 1.0 + 2.0 * C[1, 1] - tr, 1.0 + 2.0 * C[2, 2] - tr]
    ) / 4.0
    i = int(np.argmax(b2))
    q = np.zeros(4)
    if i == 0:
        q[0] = np.sqrt(b2[0])
        q[1] = (C[1, 2] - C[2, 1]) / (4.0 * q[0])
        q[2] = (C[2, 0] - C[0, 2]) / (4.0 * q[0])
        q[3] = (C[0, 1] - C[1, 0]) / (4.0 * q[0])
    elif i == 1:
        q[1] = np.sqrt(b2[1])
        q[0] = (C[1, 2] - C[2, 1]) / (4.0 * q[1])
        q[2] = (C[0, 1] + C[1, 0]) / (4.0 * q[1])
        q[3] = (C[2, 0] + C[0, 2]) / (4.0 * q[1])
    elif i == 2:
        q[2] = np.sqrt(b2[2])
        q[0] = (C[2, 0] - C[0, 2]) / (4.0 * q[2])
        q[1] = (C[0, 1] + C[1, 0]) / (4.0 * q[2])
        q[3] = (C[1, 2] + C[2, 1]) / (4.0 * q[2])
    else:
        q[3] = np.sqrt(b2[3])
        q[0] = (C[0, 1] - C[1, 0]) / (4.0 * q[3])
        q[1] = (C[2, 0] + C[0, 2]) / (4.0 * q[3])
        q[2] = (C[1, 2] + C[2, 1]) / (4.0 * q[3])
    if q[0] < 0.0:
        q = -q
    return q


def quat_to_mrp(q: np.ndarray) -> np.ndarray:
    """sigma = q_vec / (1 + q0), canonicalized to the |sigma| <= 1 set."""
    q = np.asarray(q, dtype=float)
    if q[0] < 0.0:
        q = -q
    return canonicalize_mrp(q[1:] / (1.0 + q[0]))


def euler321_to_mrp(psi: np.ndarray) -> np.ndarray:
    """Intrinsic 3-2-1 (yaw-pitch-roll) Euler angles in radians to a canonical MRP."""
    psi = np.asarray(psi, dtype=float)
    C = _rot3(psi[0]) @ _rot2(psi[1]) @ _rot1(psi[2])
    return quat_to_mrp(dcm_to_quat(C))


def mrp_to_euler321(sigma: np.ndarray) -> np.ndarray:
    """Inverse of euler321_to_mrp (angles in radians, pitch in [-pi/2, pi/2])."""
    C = mrp_to_dcm(np.asarray(sigma, dtype=float))
    yaw = np.arctan2(-C[1, 0], C[0, 0])
    pitch = np.arcsin(np.clip(C[2, 0], -1.0, 1.0))
    roll = np.arctan2(-C[2, 1], C[2, 2])
    return np.array([yaw, pitch, roll])


def random_orientation(seed: int) -> np.ndarray:
    """Uniformly random rotation as a canonical MRP, deterministic per seed.

    Samples a uniform unit quaternion (4 i.i.d. normals, normalized).
    """
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return quat_to_mrp(q)


def brunovsky_pair(m: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Chain-of-integrators pair (F, G) with m parallel chains of length r."""
    shift = np.zeros((r, r))
    for i in range(r - 1):
        shift[i, i + 1] = 1.0
    last = np.zeros((r, 1))
    last[-1, 0] = 1.0
    return np.kron(shift, np.eye(m)), np.kron(last, np.eye(m))


@dataclass(frozen=True)
class CareProblem:
    """Data for F'P + PF + Q - P G R^-1 G' P = 0."""

    F: np.ndarray
    G: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        n = self.F.shape[0]
        m = self.G.shape[1]
        if self.F.shape != (n, n) or self.G.shape != (n, m):
            raise ValueError("inconsistent F/G shapes")
        if self.Q.shape != (n, n) or self.R.shape != (m, m):
            raise ValueError("inconsistent Q/R shapes")
        if np.linalg.eigvalsh(0.5 * (self.Q + self.Q.T)).min() < -1e-10:
            raise ValueError("Q must be positive semidefinite")
        if np.linalg.eigvalsh(0.5 * (self.R + self.R.T)).min() <= 1e-10:
            raise ValueError("R must be positive definite")


@dataclass(frozen=True)
class CareSolution:
    P: np.ndarray
    residual_norm: float


def _care_residual(F, G, Q, R, P):
    return F.T @ P + P @ F + Q - P @ G @ np.linalg.solve(R, G.T @ P)


def _solve_lyapunov(A: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Solve A'P + PA = -W by Kronecker vectorization (problems here are tiny)."""
    n = A.shape[0]
    K = np.kron(np.eye(n), A.T) + np.kron(A.T, np.eye(n))
    P = np.linalg.solve(K, -W.reshape(-1, order="F")).reshape((n, n), order="F")
    return 0.5 * (P + P.T)


def solve_care(problem: CareProblem, max_refine: int = 20) -> CareSolution:
    """Stabilizing solution of the continuous-time algebraic Riccati equation.

    Eigenvector method on the 2n x 2n Hamiltonian, symmetrized, followed by
    Newton-Kleinman refinement when the residual is above tolerance.
    Raises CareSolverError if no acceptable solution is found.
    """
    F, G, Q, R = problem.F, problem.G, problem.Q, problem.R
    n = F.shape[0]
    GRG = G @ np.linalg.solve(R, G.T)

    H = np.block([[F, -GRG], [-Q, -F.T]])
    w, V = np.linalg.eig(H)
    stable = np.where(w.real < 0.0)[0]
    if stable.size != n:
        raise CareSolverError(
            f"Hamiltonian has {stable.size} stable eigenvalues, expected {n}"
        )
    Vs = V[:, stable]
    P = np.real(Vs[n:, :] @ np.linalg.inv(Vs[:n, :]))
    P = 0.5 * (P + P.T)

    tol = 1e-9 * (1.0 + np.linalg.norm(Q))
    res = np.linalg.norm(_care_residual(F, G, Q, R, P))
    for _ in range(max_refine):
        if res <= tol:
            break
        # Newton-Kleinman: one Lyapunov solve per iteration, quadratic local rate
        K = np.linalg.solve(R, G.T @ P)
        A_cl = F - G @ K
        P_new = _solve_lyapunov(A_cl, Q + K.T @ R @ K)
        res_new = np.linalg.norm(_care_residual(F, G, Q, R, P_new))
        if not np.isfinite(res_new) or res_new >= res:
            break
        P, res = P_new, res_new
    if res > tol:
        raise CareSolverError(f"CARE residual {res:.3e} above tolerance {tol:.3e}", residual=res)

    eigs = np.linalg.eigvalsh(P)
    if eigs.min() <= 0.0:
        raise CareSolverError("CARE solution is not positive definite", residual=res)
    return CareSolution(P=P, residual_norm=float(res))
