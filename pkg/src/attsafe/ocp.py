"""Energy-optimal open-loop baseline via direct single shooting.

Decision variables are the N ZOH control samples; states are eliminated by
an RK4 rollout (so dynamics defects are zero by construction).  The torque
box is handled natively by the box-projected quasi-Newton inner solver
(L-BFGS-B); wheel-momentum node constraints and the terminal set are
brought in through an augmented-Lagrangian outer loop.  Gradients come from
an analytic adjoint pass through the rollout, one vector-Jacobian product
per evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, minimize

from . import _kern
from .dynamics import PlantModel, SpacecraftState
from .sim import SIGMA_TOL, OMEGA_TOL, Trajectory

__all__ = ["OcpStatus", "OcpResult", "solve_ocp", "pareto_sweep"]

STATUS_OPTIMAL = "optimal"
STATUS_NO_SOLUTION = "no-solution"

_TERM_TOL = 1e-6
_HW_TOL = 1e-8


@dataclass(frozen=True)
class OcpStatus:
    """Residuals reported at the returned iterate."""

    status: str
    max_violation: float
    terminal_residual: float
    hw_residual: float
    projected_grad: float
    outer_iters: int
    n_evals: int

    @property
    def converged(self) -> bool:
        return self.status == STATUS_OPTIMAL


@dataclass(frozen=True)
class OcpResult:
    trajectory: Trajectory
    energy: float
    status: OcpStatus
    controls: np.ndarray


def _n_substeps(dt_seg: float, dt_target: float = 0.25) -> int:
    return max(1, int(np.ceil(dt_seg / dt_target - 1e-12)))


def _constraints(X: np.ndarray, hw_max: float):
    """Stacked inequality values g <= 0: terminal set rows then h_w node rows."""
    xN = X[-1]
    g_term = np.concatenate(
        [xN[0:3] - SIGMA_TOL, -xN[0:3] - SIGMA_TOL, xN[3:6] - OMEGA_TOL, -xN[3:6] - OMEGA_TOL]
    )
    hw = X[1:, 6:9]
    g_hw = np.concatenate([(hw - hw_max).ravel(), (-hw - hw_max).ravel()])
    return g_term, g_hw


def _pd_guess(model: PlantModel, x0: np.ndarray, t_final: float, n: int) -> np.ndarray:
    """Saturated-PD closed-loop rollout on the segment grid as initial guess."""
    dt = t_final / n
    nsub = _n_substeps(dt)
    x = x0.copy()
    U = np.empty((n, 3))
    for k in range(n):
        u = np.clip(-0.4 * x[0:3] - 0.8 * x[3:6], -model.u_max, model.u_max)
        U[k] = u
        x = _kern.step_zoh(model.J, model.Jinv, x, u, dt / nsub, nsub)
    return U


def solve_ocp(
    model: PlantModel,
    x0: SpacecraftState,
    t_final: float,
    n_segments: int,
    u_init: Optional[np.ndarray] = None,
    max_outer: int = 12,
    inner_maxiter: int = 300,
) -> OcpResult:
    """Locally optimal ZOH control minimizing the input energy over [0, t_final].

    Returns a no-solution status (with the attained violation) when the
    horizon is too short for the torque/momentum budget.
    """
    if t_final <= 0.0:
        raise ValueError("t_final must be positive")
    if n_segments < 20:
        raise ValueError("need at least 20 segments")
    n = int(n_segments)
    dt = t_final / n
    nsub = _n_substeps(dt)
    x0v = x0.as_vector()
    J, Jinv = model.J, model.Jinv
    hw_max = model.h_w_max

    U = _pd_guess(model, x0v, t_final, n) if u_init is None else np.asarray(u_init, float).copy()
    U = np.clip(U.reshape(n, 3), -model.u_max, model.u_max)

    n_term = 12
    lam_term = np.zeros(n_term)
    lam_hw = np.zeros(6 * n)
    mu = 10.0
    evals = 0

    def eval_al(uflat, lam_t, lam_h, mu_):
        nonlocal evals
        evals += 1
        Uk = uflat.reshape(n, 3)
        X = _kern.shoot_nodes(J, Jinv, x0v, Uk, dt, nsub)
        g_t, g_h = _constraints(X, hw_max)
        w_t = np.maximum(0.0, lam_t + mu_ * g_t)
        w_h = np.maximum(0.0, lam_h + mu_ * g_h)
        energy = float(np.sum(Uk**2) * dt)
        val = energy + float(np.sum(w_t**2 - lam_t**2) + np.sum(w_h**2 - lam_h**2)) / (2.0 * mu_)

        xbar = np.zeros((n + 1, 9))
        xbar[n, 0:3] += w_t[0:3] - w_t[3:6]
        xbar[n, 3:6] += w_t[6:9] - w_t[9:12]
        wh_plus = w_h[: 3 * n].reshape(n, 3)
        wh_minus = w_h[3 * n :].reshape(n, 3)
        xbar[1:, 6:9] += wh_plus - wh_minus
        grad = _kern.shoot_vjp(J, Jinv, x0v, Uk, dt, nsub, xbar).ravel()
        grad += 2.0 * dt * uflat
        return val, grad

    def violations(uflat):
        X = _kern.shoot_nodes(J, Jinv, x0v, uflat.reshape(n, 3), dt, nsub)
        g_t, g_h = _constraints(X, hw_max)
        return float(np.max(g_t, initial=0.0)), float(np.max(g_h, initial=0.0)), (g_t, g_h)

    bounds = Bounds(-model.u_max * np.ones(3 * n), model.u_max * np.ones(3 * n))
    uflat = U.ravel()
    outer_done = 0
    prev_viol = np.inf
    for outer in range(max_outer):
        res = minimize(
            eval_al,
            uflat,
            args=(lam_term, lam_hw, mu),
            method="L-BFGS-B",
            jac=True,
            bounds=bounds,
            options={"maxiter": inner_maxiter, "ftol": 1e-14, "gtol": 1e-9},
        )
        uflat = res.x
        term_viol, hw_viol, (g_t, g_h) = violations(uflat)
        outer_done = outer + 1
        if term_viol <= _TERM_TOL and hw_viol <= _HW_TOL:
            break
        lam_term = np.maximum(0.0, lam_term + mu * g_t)
        lam_hw = np.maximum(0.0, lam_hw + mu * g_h)
        viol = max(term_viol, hw_viol)
        if viol > 0.25 * prev_viol:
            mu *= 8.0
        prev_viol = viol

    Uk = uflat.reshape(n, 3)
    X = _kern.shoot_nodes(J, Jinv, x0v, Uk, dt, nsub)
    term_viol, hw_viol, _ = violations(uflat)
    energy = float(np.sum(Uk**2) * dt)

    _, grad = eval_al(uflat, lam_term, lam_hw, mu)
    evals -= 1
    pg = np.abs(np.clip(uflat - grad, -model.u_max, model.u_max) - uflat).max()

    ok = term_viol <= _TERM_TOL and hw_viol <= _HW_TOL
    status = OcpStatus(
        status=STATUS_OPTIMAL if ok else STATUS_NO_SOLUTION,
        max_violation=max(term_viol, hw_viol),
        terminal_residual=term_viol,
        hw_residual=hw_viol,
        projected_grad=float(pg),
        outer_iters=outer_done,
        n_evals=evals,
    )
    traj = Trajectory(
        times=np.arange(n + 1) * dt,
        states=X,
        inputs=Uk.copy(),
        rho=np.full(n, np.nan),
        delta=np.full(n, np.nan),
        solve_ms=np.full(n, np.nan),
        dt_ctrl=dt,
    )
    return OcpResult(trajectory=traj, energy=energy, status=status, controls=Uk.copy())


def _rescale_controls(U_prev: np.ndarray, t_prev: float, t_new: float, n: int) -> np.ndarray:
    """Time-rescale a previous solution onto the new horizon (ZOH resampling
    with the double-integrator magnitude scaling)."""
    n_prev = U_prev.shape[0]
    frac = (np.arange(n) + 0.5) / n  # segment midpoints in [0, 1]
    src = np.minimum((frac * n_prev).astype(int), n_prev - 1)
    return (t_prev / t_new) ** 2 * U_prev[src]


def pareto_sweep(
    model: PlantModel,
    x0: SpacecraftState,
    t_grid: np.ndarray,
    n_segments: int,
    warm_start: bool = True,
) -> list:
    """solve_ocp per grid point, warm-starting each solve from the previous.

    Per-point failures are recorded as no-solution entries and the sweep
    continues.  Returns a list of (t_final, energy, OcpStatus, OcpResult).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be increasing")
    out = []
    prev: Optional[OcpResult] = None
    prev_t: Optional[float] = None
    for t in t_grid:
        u_init = None
        if warm_start and prev is not None and prev.status.converged:
            u_init = _rescale_controls(prev.controls, prev_t, float(t), n_segments)
        result = solve_ocp(model, x0, float(t), n_segments, u_init=u_init)
        out.append((float(t), result.energy, result.status, result))
        if result.status.converged:
            prev, prev_t = result, float(t)
    return out
