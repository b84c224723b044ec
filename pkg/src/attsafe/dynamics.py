"""Spacecraft + reaction-wheel plant model and fixed-step integration.

State x = [sigma, omega, h_w] (9-dim).  Equations of motion:

    sigma_dot = M(sigma) omega
    J omega_dot = -omega x (J omega + h_w) + u + d
    h_w_dot = -u

which is input-affine, x_dot = f(x) + g(x) u + [0; Jinv d; 0].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kern
from .errors import IntegrationError
from .mathcore import mrp_kinematics_matrix

__all__ = [
    "SpacecraftState",
    "PlantModel",
    "DisturbanceModel",
    "drift",
    "input_matrix",
    "rk4_step",
    "advance_zoh",
]


@dataclass(frozen=True)
class SpacecraftState:
    """Attitude MRP, body angular velocity (rad/s), RW momentum (N m s), time (s)."""

    sigma: np.ndarray
    omega: np.ndarray
    h_w: np.ndarray
    t: float = 0.0

    @staticmethod
    def from_vector(x: np.ndarray, t: float = 0.0) -> "SpacecraftState":
        x = np.asarray(x, dtype=float)
        return SpacecraftState(sigma=x[0:3].copy(), omega=x[3:6].copy(), h_w=x[6:9].copy(), t=t)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.sigma, self.omega, self.h_w])

    @staticmethod
    def rest(sigma: np.ndarray) -> "SpacecraftState":
        """Rest-to-rest initial condition: zero rates, zero wheel momentum."""
        return SpacecraftState(
            sigma=np.asarray(sigma, dtype=float).copy(), omega=np.zeros(3), h_w=np.zeros(3)
        )


@dataclass(frozen=True)
class PlantModel:
    """Inertia matrix (kg m^2) plus symmetric torque and momentum box bounds."""

    J: np.ndarray
    u_max: float
    h_w_max: float
    Jinv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if J.shape != (3, 3) or not np.allclose(J, J.T, atol=1e-12):
            raise ValueError("J must be a symmetric 3x3 matrix")
        if np.linalg.eigvalsh(J).min() <= 0.0:
            raise ValueError("J must be positive definite")
        if self.u_max <= 0.0 or self.h_w_max <= 0.0:
            raise ValueError("u_max and h_w_max must be positive")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "Jinv", np.linalg.inv(J))


# Table I values: the simulation model used throughout the experiments.
TABLE1_J = np.array(
    [
        [1.8140, -0.1185, 0.0275],
        [-0.1185, 1.7350, 0.0169],
        [0.0275, 0.0169, 3.4320],
    ]
)
TABLE1_U_MAX = 0.123
TABLE1_HW_MAX = 0.50


def table1_model() -> PlantModel:
    return PlantModel(J=TABLE1_J, u_max=TABLE1_U_MAX, h_w_max=TABLE1_HW_MAX)


@dataclass(frozen=True)
class DisturbanceModel:
    """External torque hook d(t, state) -> 3-vector; default is zero."""

    d: Callable[[float, SpacecraftState], np.ndarray]

    @staticmethod
    def zero() -> "DisturbanceModel":
        return DisturbanceModel(d=lambda t, state: np.zeros(3))


def drift(model: PlantModel, state: SpacecraftState) -> np.ndarray:
    """f(x) = [M(sigma) omega; -Jinv [omega]x (J omega + h_w); 0]."""
    M = mrp_kinematics_matrix(state.sigma)
    L = model.J @ state.omega + state.h_w
    return np.concatenate(
        [M @ state.omega, -model.Jinv @ np.cross(state.omega, L), np.zeros(3)]
    )


def input_matrix(model: PlantModel) -> np.ndarray:
    """g(x) = [0; Jinv; -I] (constant for this plant)."""
    g = np.zeros((9, 3))
    g[3:6, :] = model.Jinv
    g[6:9, :] = -np.eye(3)
    return g


def _xdot(model, x, u, d_torque):
    s, w, hw = x[0:3], x[3:6], x[6:9]
    M = mrp_kinematics_matrix(s)
    L = model.J @ w + hw
    return np.concatenate(
        [M @ w, model.Jinv @ (u + d_torque - np.cross(w, L)), -u]
    )


def rk4_step(
    model: PlantModel,
    state: SpacecraftState,
    u: np.ndarray,
    d: Optional[DisturbanceModel],
    dt: float,
) -> SpacecraftState:
    """One classical RK4 step with u held constant (zero-order hold)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    u = np.asarray(u, dtype=float)
    x = state.as_vector()
    t = state.t

    if d is None:
        x_new = _kern.numpy_backend.step_zoh(model.J, model.Jinv, x, u, dt, 1)
    else:
        k1 = _xdot(model, x, u, d.d(t, state))
        s2 = SpacecraftState.from_vector(x + 0.5 * dt * k1, t + 0.5 * dt)
        k2 = _xdot(model, s2.as_vector(), u, d.d(s2.t, s2))
        s3 = SpacecraftState.from_vector(x + 0.5 * dt * k2, t + 0.5 * dt)
        k3 = _xdot(model, s3.as_vector(), u, d.d(s3.t, s3))
        s4 = SpacecraftState.from_vector(x + dt * k3, t + dt)
        k4 = _xdot(model, s4.as_vector(), u, d.d(s4.t, s4))
        x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if not np.all(np.isfinite(x_new)):
        raise IntegrationError(f"non-finite state after step from t={t}")
    return SpacecraftState.from_vector(x_new, t + dt)


def advance_zoh(
    model: PlantModel,
    state: SpacecraftState,
    u: np.ndarray,
    d: Optional[DisturbanceModel],
    dt_sub: float,
    nsub: int,
) -> SpacecraftState:
    """Advance one control period (nsub RK4 substeps) under constant u.

    Dispatches to the compiled kernel when there is no disturbance.
    """
    if d is None:
        x = _kern.step_zoh(model.J, model.Jinv, state.as_vector(), np.asarray(u, float), dt_sub, nsub)
        if not np.all(np.isfinite(x)):
            raise IntegrationError(f"non-finite state after step from t={state.t}")
        return SpacecraftState.from_vector(x, state.t + nsub * dt_sub)
    out = state
    for _ in range(nsub):
        out = rk4_step(model, out, u, d, dt_sub)
    return out
