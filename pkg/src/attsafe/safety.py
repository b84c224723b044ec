"""CLF construction/evaluation and CBF box constraints for wheel momentum.

The quadratic CLF V = eta' P eta comes from the Riccati equation on the
double-integrator (Brunovsky) form of the linearized output dynamics.  The
input weight seen in transverse coordinates is state dependent,
R(x) = nu * (L_bar L_bar')^-1, so there are two modes:

 * "per-step-R": re-solve the 6x6 CARE with the current R at every call.
   The min-norm decay W then collapses to the quadratic form
   eta' (Q + P G R^-1 G' P) eta.
 * "frozen-P": keep the P solved at the first call.  The algebraic collapse
   no longer holds away from that state, so W falls back to the explicit
   square-root expression with the current R.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import PlantModel, SpacecraftState
from .errors import SafetyViolationError
from .fblin import LinearizationData
from .mathcore import CareProblem, brunovsky_pair, solve_care

__all__ = [
    "PER_STEP_R",
    "FROZEN_P",
    "ClfData",
    "build_clf",
    "ClfBuilder",
    "clf_terms",
    "decay_w_minnorm",
    "decay_w_res",
    "CbfBounds",
    "cbf_bounds",
]

PER_STEP_R = "per-step-R"
FROZEN_P = "frozen-P"

_F6, _G6 = brunovsky_pair(3, 2)


@dataclass(frozen=True)
class ClfData:
    """Riccati solution with the weights it was (or was not) solved against."""

    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    nu: float
    mode: str


def build_clf(
    lin: LinearizationData,
    q_weight: np.ndarray,
    nu: float,
    mode: str = PER_STEP_R,
    frozen_p: Optional[np.ndarray] = None,
) -> ClfData:
    """CLF data at the current state.

    R = nu * (L_bar L_bar')^-1 is always evaluated at the current state; P is
    re-solved unless a frozen P is supplied in frozen-P mode.
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    if mode not in (PER_STEP_R, FROZEN_P):
        raise ValueError(f"unknown CLF mode {mode!r}")
    Lb = lin.L_bar
    R = nu * np.linalg.inv(Lb @ Lb.T)
    R = 0.5 * (R + R.T)
    if mode == FROZEN_P and frozen_p is not None:
        P = frozen_p
    else:
        P = solve_care(CareProblem(F=_F6, G=_G6, Q=q_weight, R=R)).P
    return ClfData(P=P, Q=np.asarray(q_weight, dtype=float), R=R, nu=float(nu), mode=mode)


class ClfBuilder:
    """Per-run CLF factory implementing the mode contract.

    In frozen-P mode the Riccati solution from the first build is reused for
    every later state; in per-step-R mode each build re-solves.
    """

    def __init__(self, q_weight: np.ndarray, nu: float, mode: str = PER_STEP_R):
        self.q_weight = np.asarray(q_weight, dtype=float)
        self.nu = float(nu)
        self.mode = mode
        self._frozen_p: Optional[np.ndarray] = None

    def build(self, lin: LinearizationData) -> ClfData:
        clf = build_clf(lin, self.q_weight, self.nu, self.mode, frozen_p=self._frozen_p)
        if self.mode == FROZEN_P and self._frozen_p is None:
            self._frozen_p = clf.P
        return clf


def clf_terms(clf: ClfData, eta: np.ndarray) -> tuple[float, float, np.ndarray]:
    """(V, LfV, LgV) with V = eta'P eta, LfV = eta'(F'P+PF)eta, LgV = 2 eta'P G."""
    eta = np.asarray(eta, dtype=float)
    P_eta = clf.P @ eta
    V = float(eta @ P_eta)
    LfV = float(eta @ (_F6.T @ P_eta) + (_F6 @ eta) @ P_eta)
    LgV = 2.0 * (_G6.T @ P_eta)
    return V, LfV, LgV


def decay_w_minnorm(clf: ClfData, eta: np.ndarray) -> float:
    """Min-norm decay rate W(eta).

    Quadratic form eta'(Q + P G R^-1 G' P) eta in per-step-R mode (valid when
    P solves the CARE for the stored R); square-root form otherwise.
    """
    eta = np.asarray(eta, dtype=float)
    if clf.mode == PER_STEP_R:
        PG = clf.P @ _G6
        W = eta @ clf.Q @ eta + eta @ PG @ np.linalg.solve(clf.R, PG.T @ eta)
        return float(W)
    V, LfV, LgV = clf_terms(clf, eta)
    quad = float(eta @ clf.Q @ eta)
    return float(np.sqrt(LfV**2 + quad * (LgV @ np.linalg.solve(clf.R, LgV))))


def decay_w_res(clf: ClfData, eta: np.ndarray, epsilon: float) -> float:
    """Exponential decay rate W = (1/eps) (lambda_min(Q)/lambda_max(P)) V."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    eta = np.asarray(eta, dtype=float)
    lam_q = np.linalg.eigvalsh(clf.Q).min()
    lam_p = np.linalg.eigvalsh(clf.P).max()
    V = float(eta @ clf.P @ eta)
    return (lam_q / lam_p) * V / epsilon


@dataclass(frozen=True)
class CbfBounds:
    """Componentwise torque interval implied by the momentum barriers:
    lower = -alpha (h_max - h_w), upper = alpha (h_w - h_min)."""

    lower: np.ndarray
    upper: np.ndarray


def cbf_bounds(model: PlantModel, state: SpacecraftState, alpha: float) -> CbfBounds:
    """Torque bounds enforcing forward invariance of the momentum box."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    h = state.h_w
    hmax = model.h_w_max
    b_up = hmax - h  # distance to the upper momentum bound
    b_lo = h + hmax  # distance to the lower bound (h_min = -h_max)
    if np.any(b_up < -1e-9) or np.any(b_lo < -1e-9):
        raise SafetyViolationError(
            f"h_w={h} outside the momentum box +/-{hmax}; barrier set is not "
            "forward invariant from outside"
        )
    return CbfBounds(lower=-alpha * b_up, upper=alpha * b_lo)
