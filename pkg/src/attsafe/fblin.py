"""Input-output linearization of the attitude subsystem (output y = sigma).

The output has relative degree 2:

    sigma_ddot = Mdot(sigma, sigma_dot) omega
                 + M(sigma) Jinv (-omega x (J omega + h_w) + u)
               = mu_bar(x) + L_bar(x) u

with L_bar = M(sigma) Jinv, always nonsingular because M M' is a positive
multiple of the identity and J is positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import PlantModel, SpacecraftState
from .mathcore import mrp_kinematics_matrix, mrp_kinematics_matrix_dot

__all__ = ["LinearizationData", "linearize", "realize_input"]


@dataclass(frozen=True)
class LinearizationData:
    """Transverse coordinates eta = [sigma; sigma_dot], decoupling matrix,
    drift and the feedforward torque u_star = -L_bar^-1 mu_bar."""

    eta: np.ndarray
    L_bar: np.ndarray
    mu_bar: np.ndarray
    u_star: np.ndarray


def linearize(model: PlantModel, state: SpacecraftState) -> LinearizationData:
    """Compute eta, L_bar, mu_bar, u_star at the given state."""
    sigma, omega, h_w = state.sigma, state.omega, state.h_w
    M = mrp_kinematics_matrix(sigma)
    sigma_dot = M @ omega
    Mdot = mrp_kinematics_matrix_dot(sigma, sigma_dot)

    L_bar = M @ model.Jinv
    L = model.J @ omega + h_w
    mu_bar = Mdot @ omega - L_bar @ np.cross(omega, L)
    u_star = -np.linalg.solve(L_bar, mu_bar)
    return LinearizationData(
        eta=np.concatenate([sigma, sigma_dot]), L_bar=L_bar, mu_bar=mu_bar, u_star=u_star
    )


def realize_input(lin: LinearizationData, mu: np.ndarray) -> np.ndarray:
    """Torque that makes the output dynamics exactly sigma_ddot = mu."""
    return lin.u_star + np.linalg.solve(lin.L_bar, np.asarray(mu, dtype=float))
