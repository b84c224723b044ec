"""The four feedback laws behind one interface: state in, torque out.

 * pd-sat         saturated PD on (sigma, omega); no QP
 * res-clf-qp     min-norm QP with a fixed exponential decay rate
 * od-clf-qp      optimal-decay QP (decision variable rho), no CBF rows
 * od-clf-cbf-qp  optimal-decay QP plus the momentum-barrier torque interval

The QP controllers all share the slacked CLF row, so they are feasible at
every state (u = 0 with a large enough slack is always admissible); on the
rare solver failure they fall back to zero torque, which the barrier
constraints always admit, and flag the step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import PlantModel, SpacecraftState
from .fblin import linearize
from .mathcore import CareProblem, brunovsky_pair, solve_care
from .qp import QpProblem, QpWeights, assemble_controller_qp, solve_qp
from .safety import (
    FROZEN_P,
    PER_STEP_R,
    ClfBuilder,
    cbf_bounds,
    clf_terms,
    decay_w_minnorm,
)

__all__ = [
    "ControlOutput",
    "ControllerConfig",
    "make_controller",
    "pd_saturated",
    "res_clf_qp",
    "od_clf_qp",
    "od_clf_cbf_qp",
    "PD_SAT",
    "RES_CLF_QP",
    "OD_CLF_QP",
    "OD_CLF_CBF_QP",
]

PD_SAT = "pd-sat"
RES_CLF_QP = "res-clf-qp"
OD_CLF_QP = "od-clf-qp"
OD_CLF_CBF_QP = "od-clf-cbf-qp"
VARIANTS = (PD_SAT, RES_CLF_QP, OD_CLF_QP, OD_CLF_CBF_QP)

_F6, _G6 = brunovsky_pair(3, 2)


@dataclass(frozen=True)
class ControlOutput:
    u: np.ndarray
    rho: Optional[float] = None
    delta: Optional[float] = None
    qp_iterations: Optional[int] = None
    solve_time: float = 0.0
    status: str = "ok"


@dataclass
class ControllerConfig:
    """Variant name plus its gain map (see default.cfg for the tunings)."""

    variant: str
    gains: dict = field(default_factory=dict)
    clf_mode: str = PER_STEP_R

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown controller variant {self.variant!r}")
        if self.clf_mode not in (PER_STEP_R, FROZEN_P):
            raise ValueError(f"unknown clf mode {self.clf_mode!r}")
        for key, val in self.gains.items():
            arr = np.asarray(val, dtype=float)
            if arr.ndim == 0 and arr <= 0.0:
                raise ValueError(f"gain {key} must be strictly positive")
            if arr.ndim == 2 and np.linalg.eigvalsh(0.5 * (arr + arr.T)).min() <= 0.0:
                raise ValueError(f"gain matrix {key} must be positive definite")


def _gain(config: ControllerConfig, key: str, default):
    val = config.gains.get(key, default)
    return np.asarray(val, dtype=float) if np.ndim(val) else float(val)


class PdController:
    """u = clamp(-k_p sigma - k_d omega)."""

    def __init__(self, config: ControllerConfig):
        self.k_p = float(config.gains.get("k_p", 0.4))
        self.k_d = float(config.gains.get("k_d", 0.8))

    def step(self, model: PlantModel, state: SpacecraftState) -> ControlOutput:
        t0 = time.perf_counter()
        u = -self.k_p * state.sigma - self.k_d * state.omega
        u = np.clip(u, -model.u_max, model.u_max)
        return ControlOutput(u=u, solve_time=time.perf_counter() - t0)


def _solve_with_fallback(prob: QpProblem, z0, u_dim: int = 3):
    sol = solve_qp(prob, z0=z0)
    if sol.status != "optimal":
        return np.zeros(u_dim), sol, "fallback"
    return sol.z[:u_dim], sol, "ok"


class ResClfQpController:
    """Fixed-decay min-norm QP on scaled coordinates eta_s = [K1 sigma; K2 sigma_dot].

    P is solved once from the Riccati equation with R = I (the premise of the
    exponential decay-rate formula) and then frozen.  The (K1, K2) pair is
    normalized to unit geometric mean: only the ratio shapes the CLF, and an
    un-normalized overall scale would make the published slack penalty
    meaningless (V of order K^2 leaves the QP torque-cost dominated and the
    controller inert).
    """

    def __init__(self, config: ControllerConfig):
        g = config.gains
        self.Q = np.asarray(g.get("q_weight", np.eye(6)), dtype=float)
        k1 = float(g.get("k1", 0.01))
        k2 = float(g.get("k2", 0.05))
        scale = float(np.sqrt(k1 * k2))
        self.k1 = k1 / scale
        self.k2 = k2 / scale
        self.epsilon = float(g.get("epsilon", 0.2))
        self.H = np.asarray(g.get("h_weight", np.eye(3)), dtype=float)
        self.p_delta = float(g.get("p_delta", 100.0))
        self.P = solve_care(CareProblem(F=_F6, G=_G6, Q=self.Q, R=np.eye(3))).P
        self.decay_gain = float(
            np.linalg.eigvalsh(self.Q).min() / np.linalg.eigvalsh(self.P).max() / self.epsilon
        )
        # scaled-coordinate dynamics: eta_s_dot = Fs eta_s + Gs mu
        self.Fs = np.kron(np.array([[0.0, self.k1 / self.k2], [0.0, 0.0]]), np.eye(3))
        self.Gs = np.kron(np.array([[0.0], [self.k2]]), np.eye(3))

    def step(self, model: PlantModel, state: SpacecraftState) -> ControlOutput:
        t0 = time.perf_counter()
        lin = linearize(model, state)
        eta_s = np.concatenate([self.k1 * lin.eta[:3], self.k2 * lin.eta[3:]])
        P_eta = self.P @ eta_s
        V = float(eta_s @ P_eta)
        LfV = float(eta_s @ (self.Fs.T @ P_eta) + (self.Fs @ eta_s) @ P_eta)
        LgV = 2.0 * (self.Gs.T @ P_eta)
        W = self.decay_gain * V

        Lb = lin.L_bar
        LHL = Lb.T @ self.H @ Lb
        Phi = np.zeros((4, 4))
        Phi[:3, :3] = 2.0 * LHL
        Phi[3, 3] = 2.0 * self.p_delta
        phi = np.zeros(4)
        phi[:3] = -2.0 * LHL @ lin.u_star
        c0 = float(lin.u_star @ LHL @ lin.u_star)

        rows = [np.concatenate([LgV @ Lb, [-1.0]])]
        rhs = [-LfV - W + (LgV @ Lb) @ lin.u_star]
        for i in range(3):
            r = np.zeros(4)
            r[i] = 1.0
            rows.append(r)
            rhs.append(model.u_max)
        for i in range(3):
            r = np.zeros(4)
            r[i] = -1.0
            rows.append(r)
            rhs.append(model.u_max)
        prob = QpProblem(Phi=Phi, phi=phi, A=np.array(rows), b=np.array(rhs), c0=c0)

        delta_w = max(0.0, LfV + LgV @ lin.mu_bar + W)
        u, sol, status = _solve_with_fallback(prob, np.array([0.0, 0.0, 0.0, delta_w]))
        delta = float(sol.z[3]) if status == "ok" else None
        return ControlOutput(
            u=u,
            delta=delta,
            qp_iterations=sol.iterations,
            solve_time=time.perf_counter() - t0,
            status=status,
        )


class OdClfQpController:
    """Optimal-decay CLF QP, optionally with the momentum CBF torque interval."""

    def __init__(self, config: ControllerConfig, with_cbf: bool):
        g = config.gains
        self.Q = np.asarray(g.get("q_weight", np.eye(6)), dtype=float)
        self.nu = float(g.get("nu", 10.0))
        self.weights = QpWeights(
            H=np.asarray(g.get("h_weight", np.eye(3)), dtype=float),
            p_rho=float(g.get("p_rho", 0.1)),
            p_delta=float(g.get("p_delta", 100.0)),
        )
        self.with_cbf = with_cbf
        self.alpha = float(g.get("alpha", 0.05)) if with_cbf else 0.0
        self.builder = ClfBuilder(self.Q, self.nu, config.clf_mode)

    def step(self, model: PlantModel, state: SpacecraftState) -> ControlOutput:
        t0 = time.perf_counter()
        lin = linearize(model, state)
        clf = self.builder.build(lin)
        terms = clf_terms(clf, lin.eta)
        W = decay_w_minnorm(clf, lin.eta)
        cbf = cbf_bounds(model, state, self.alpha) if self.with_cbf else None
        u_box = (-model.u_max * np.ones(3), model.u_max * np.ones(3))
        prob = assemble_controller_qp(lin, terms, W, cbf, u_box, self.weights)

        _, LfV, LgV = terms
        delta_w = max(0.0, LfV + LgV @ lin.mu_bar)
        u, sol, status = _solve_with_fallback(prob, np.array([0.0, 0.0, 0.0, 0.0, delta_w]))
        rho = float(sol.z[3]) if status == "ok" else None
        delta = float(sol.z[4]) if status == "ok" else None
        return ControlOutput(
            u=u,
            rho=rho,
            delta=delta,
            qp_iterations=sol.iterations,
            solve_time=time.perf_counter() - t0,
            status=status,
        )


def make_controller(config: ControllerConfig):
    if config.variant == PD_SAT:
        return PdController(config)
    if config.variant == RES_CLF_QP:
        return ResClfQpController(config)
    if config.variant == OD_CLF_QP:
        return OdClfQpController(config, with_cbf=False)
    return OdClfQpController(config, with_cbf=True)


# Functional forms (convenience wrappers; QP controllers rebuilt per call, so
# frozen-P mode freezes at the state passed in).

def pd_saturated(state, model, k_p: float = 0.4, k_d: float = 0.8) -> ControlOutput:
    return PdController(ControllerConfig(PD_SAT, {"k_p": k_p, "k_d": k_d})).step(model, state)


def res_clf_qp(state, model, config: ControllerConfig) -> ControlOutput:
    return ResClfQpController(config).step(model, state)


def od_clf_qp(state, model, config: ControllerConfig) -> ControlOutput:
    return OdClfQpController(config, with_cbf=False).step(model, state)


def od_clf_cbf_qp(state, model, config: ControllerConfig) -> ControlOutput:
    return OdClfQpController(config, with_cbf=True).step(model, state)
