"""Dense strictly convex QP solver (primal active set) and the controller QP.

Problems are

    min_z 1/2 z' Phi z + phi' z + c0    s.t.  A z <= b

with Phi positive definite.  Sizes here are tiny (n <= 6-ish, a dozen rows),
so exact active-set pivoting beats first-order methods and avoids the
solution chatter they introduce in closed loop.

When no feasible start is supplied the solver minimizes an exact-penalty
augmentation (extra slack variable s with a large linear weight); s* = 0
recovers the original solution, and a persistent s* > 0 yields an
infeasibility certificate (approximate Farkas ray) from a dedicated
phase-I solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fblin import LinearizationData
from .safety import CbfBounds

__all__ = ["QpProblem", "QpSolution", "QpWeights", "solve_qp", "assemble_controller_qp"]

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_ITERATION_CAP = "iteration-cap"

_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class QpProblem:
    Phi: np.ndarray
    phi: np.ndarray
    A: np.ndarray
    b: np.ndarray
    c0: float = 0.0

    def __post_init__(self):
        Phi = np.asarray(self.Phi, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        A = np.asarray(self.A, dtype=float).reshape(-1, Phi.shape[0])
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(Phi)) and np.all(np.isfinite(phi))
                and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("QP data must be finite")
        if np.linalg.eigvalsh(0.5 * (Phi + Phi.T)).min() <= 1e-12:
            raise ValueError("Phi must be positive definite")
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b row counts differ")
        object.__setattr__(self, "Phi", 0.5 * (Phi + Phi.T))
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.Phi.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[0]

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.Phi @ z + self.phi @ z + self.c0)


@dataclass(frozen=True)
class QpSolution:
    z: np.ndarray
    active_set: tuple
    objective: float
    iterations: int
    status: str
    multipliers: Optional[np.ndarray] = None
    farkas_ray: Optional[np.ndarray] = None


def _active_set_core(Phi, phi, A, b, z0, max_iter, bland_after):
    """Primal active-set loop from a feasible z0.  Returns (z, W, lam, iters, hit_cap)."""
    n = Phi.shape[0]
    k = A.shape[0]
    z = np.array(z0, dtype=float)
    work: list[int] = []
    lam = np.zeros(0)

    def _drop_or_done(it):
        # multipliers in hand are those of the working-set optimum we are at
        if lam.size == 0 or lam.min() >= -1e-10:
            return True
        if it > bland_after:
            drop = next(j for j, lj in enumerate(lam) if lj < -1e-10)
        else:
            drop = int(np.argmin(lam))
        work.pop(drop)
        return False

    for it in range(1, max_iter + 1):
        g = Phi @ z + phi
        if work:
            Aw = A[work]
            m = len(work)
            K = np.zeros((n + m, n + m))
            K[:n, :n] = Phi
            K[:n, n:] = Aw.T
            K[n:, :n] = Aw
            rhs = np.concatenate([-g, np.zeros(m)])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            p = sol[:n]
            lam = sol[n:]
        else:
            p = np.linalg.solve(Phi, -g)
            lam = np.zeros(0)

        if np.linalg.norm(p) <= 1e-9 * (1.0 + np.linalg.norm(z)):
            if _drop_or_done(it):
                return z, work, lam, it, False
            continue

        # ratio test over constraints not in the working set
        alpha = 1.0
        blocking = -1
        Ap = A @ p
        resid = b - A @ z
        for i in range(k):
            if i in work or Ap[i] <= 1e-13:
                continue
            ratio = resid[i] / Ap[i]
            if ratio < alpha - 1e-14:
                alpha = max(ratio, 0.0)
                blocking = i
        z = z + alpha * p
        if blocking >= 0:
            work.append(blocking)
        elif alpha == 1.0:
            # full step with nothing blocking: we are AT the working-set
            # optimum whose multipliers were just computed
            if _drop_or_done(it):
                return z, work, lam, it, False
    return z, work, lam, max_iter, True


def _phase1_certificate(A, b):
    """Dedicated phase-I solve used only to build a Farkas-style certificate."""
    n = A.shape[1]
    k = A.shape[0]
    eps = 1e-6
    Phi1 = np.eye(n + 1)
    Phi1[:n, :n] *= eps
    phi1 = np.zeros(n + 1)
    A1 = np.hstack([A, -np.ones((k, 1))])
    A1 = np.vstack([A1, np.concatenate([np.zeros(n), [-1.0]])])
    b1 = np.concatenate([b, [0.0]])
    s0 = max(0.0, float(np.max(-b)) if k else 0.0) + 1.0
    z0 = np.concatenate([np.zeros(n), [s0]])
    z, work, lam, _, _ = _active_set_core(Phi1, phi1, A1, b1, z0, 200 * (n + k + 1), 3 * (k + 1))
    mult = np.zeros(k)
    for idx, row in enumerate(work):
        if row < k:
            mult[row] = max(lam[idx], 0.0) if lam.size else 0.0
    norm = np.linalg.norm(mult)
    return mult / norm if norm > 0 else mult


def solve_qp(problem: QpProblem, z0: Optional[np.ndarray] = None) -> QpSolution:
    """Global minimizer over {A z <= b}, or an infeasibility certificate."""
    Phi, phi, A, b = problem.Phi, problem.phi, problem.A, problem.b
    n, k = problem.n, problem.k
    max_iter = 100 * (n + k)

    if k == 0:
        z = np.linalg.solve(Phi, -phi)
        return QpSolution(z=z, active_set=(), objective=problem.objective(z),
                          iterations=0, status=STATUS_OPTIMAL, multipliers=np.zeros(0))

    if z0 is not None:
        z0 = np.asarray(z0, dtype=float)
        if np.max(A @ z0 - b) > _FEAS_TOL:
            z0 = None

    if z0 is not None:
        z, work, lam, iters, capped = _active_set_core(Phi, phi, A, b, z0, max_iter, 3 * k)
        mult = np.zeros(k)
        mult[work] = np.maximum(lam, 0.0) if lam.size else 0.0
        status = STATUS_ITERATION_CAP if capped else STATUS_OPTIMAL
        return QpSolution(z=z, active_set=tuple(sorted(work)), objective=problem.objective(z),
                          iterations=iters, status=status, multipliers=mult)

    # No feasible start: exact-penalty augmentation with a slack variable s.
    # The penalty weight only needs to exceed the l1 norm of the optimal
    # multipliers, so start moderate (conditioning) and escalate on demand.
    scale = 1.0 + np.abs(phi).max(initial=0.0) + np.abs(Phi).max()
    M = 10.0 * scale
    total_iters = 0
    for _ in range(4):
        Phi_a = np.zeros((n + 1, n + 1))
        Phi_a[:n, :n] = Phi
        Phi_a[n, n] = max(1.0, np.trace(Phi) / n)
        phi_a = np.concatenate([phi, [M]])
        A_a = np.hstack([A, -np.ones((k, 1))])
        A_a = np.vstack([A_a, np.concatenate([np.zeros(n), [-1.0]])])
        b_a = np.concatenate([b, [0.0]])
        s0 = max(0.0, float(np.max(-b))) + 1.0
        za = np.concatenate([np.zeros(n), [s0]])
        za, _, _, iters, _ = _active_set_core(
            Phi_a, phi_a, A_a, b_a, za, 100 * (n + 1 + k + 1), 3 * (k + 1)
        )
        total_iters += iters
        if za[n] <= _FEAS_TOL:
            # polish on the original, well-conditioned problem
            z, work, lam, iters, capped = _active_set_core(
                Phi, phi, A, b, za[:n], max_iter, 3 * k
            )
            total_iters += iters
            mult = np.zeros(k)
            mult[work] = np.maximum(lam, 0.0) if lam.size else 0.0
            status = STATUS_ITERATION_CAP if capped else STATUS_OPTIMAL
            return QpSolution(z=z, active_set=tuple(sorted(work)),
                              objective=problem.objective(z),
                              iterations=total_iters, status=status, multipliers=mult)
        M *= 100.0

    ray = _phase1_certificate(A, b)
    return QpSolution(z=za[:n], active_set=(), objective=np.inf,
                      iterations=total_iters, status=STATUS_INFEASIBLE, farkas_ray=ray)


@dataclass(frozen=True)
class QpWeights:
    """Cost weights of the controller QP: torque metric H plus the penalties
    on the decay weight deviation (1 - rho)^2 and the slack delta^2."""

    H: np.ndarray
    p_rho: float
    p_delta: float


def assemble_controller_qp(
    lin: LinearizationData,
    clf_terms: tuple,
    W: float,
    cbf: Optional[CbfBounds],
    u_bounds: tuple,
    weights: QpWeights,
) -> QpProblem:
    """Controller subproblem in the decision vector z = (u, rho, delta).

    Cost: |L_bar (u - u_star)|_H^2 + p_rho (1 - rho)^2 + p_delta delta^2.
    Rows: the CLF decay inequality, the CBF torque interval (when given),
    the torque box, and rho >= 0.
    """
    V, LfV, LgV = clf_terms
    if W < 0.0:
        raise ValueError("decay rate W must be nonnegative")
    Lb = lin.L_bar
    u_star = lin.u_star
    H = np.asarray(weights.H, dtype=float)

    LHL = Lb.T @ H @ Lb
    Phi = np.zeros((5, 5))
    Phi[:3, :3] = 2.0 * LHL
    Phi[3, 3] = 2.0 * weights.p_rho
    Phi[4, 4] = 2.0 * weights.p_delta
    phi = np.zeros(5)
    phi[:3] = -2.0 * LHL @ u_star
    phi[3] = -2.0 * weights.p_rho
    c0 = float(u_star @ LHL @ u_star + weights.p_rho)

    rows = []
    rhs = []
    # CLF: LfV + LgV L_bar (u - u_star) <= -rho W + delta
    clf_row = np.zeros(5)
    clf_row[:3] = LgV @ Lb
    clf_row[3] = W
    clf_row[4] = -1.0
    rows.append(clf_row)
    rhs.append(-LfV + (LgV @ Lb) @ u_star)

    def _box(lower, upper):
        for i in range(3):
            r = np.zeros(5)
            r[i] = 1.0
            rows.append(r)
            rhs.append(upper[i])
        for i in range(3):
            r = np.zeros(5)
            r[i] = -1.0
            rows.append(r)
            rhs.append(-lower[i])

    if cbf is not None:
        _box(cbf.lower, cbf.upper)
    u_lo, u_hi = u_bounds
    _box(np.asarray(u_lo, dtype=float), np.asarray(u_hi, dtype=float))

    rho_row = np.zeros(5)
    rho_row[3] = -1.0
    rows.append(rho_row)
    rhs.append(0.0)

    return QpProblem(Phi=Phi, phi=phi, A=np.array(rows), b=np.array(rhs), c0=c0)
