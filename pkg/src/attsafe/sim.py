"""Closed-loop runner, terminal-set detection, run metrics and CSV logging."""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import DisturbanceModel, PlantModel, SpacecraftState, advance_zoh
from .errors import AttsafeError, SimulationAborted

__all__ = [
    "Trajectory",
    "RunMetrics",
    "run_closed_loop",
    "detect_t_final",
    "compute_metrics",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "CSV_HEADER",
]

SIGMA_TOL = 0.02
OMEGA_TOL = 0.005

CSV_HEADER = "t,sig1,sig2,sig3,om1,om2,om3,hw1,hw2,hw3,u1,u2,u3,rho,delta,solve_ms"


@dataclass
class Trajectory:
    """Logged closed-loop run at control-step resolution.

    states has one more row than inputs; diagnostics (rho, delta, solve_ms)
    are NaN where a controller does not produce them.
    """

    times: np.ndarray          # (K+1,)
    states: np.ndarray         # (K+1, 9) rows [sigma, omega, h_w]
    inputs: np.ndarray         # (K, 3)
    rho: np.ndarray            # (K,)
    delta: np.ndarray          # (K,)
    solve_ms: np.ndarray       # (K,)
    dt_ctrl: float
    times_fine: Optional[np.ndarray] = None
    states_fine: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times/states length mismatch")
        if self.inputs.shape[0] != self.states.shape[0] - 1:
            raise ValueError("inputs must have one row fewer than states")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        steps = np.diff(self.times)
        if steps.size and np.max(np.abs(steps - self.dt_ctrl)) > 1e-9:
            raise ValueError("epochs must be uniformly spaced at the control period")

    @property
    def n_steps(self) -> int:
        return self.inputs.shape[0]

    def sigma(self) -> np.ndarray:
        return self.states[:, 0:3]

    def omega(self) -> np.ndarray:
        return self.states[:, 3:6]

    def h_w(self) -> np.ndarray:
        return self.states[:, 6:9]

    def state(self, k: int) -> SpacecraftState:
        return SpacecraftState.from_vector(self.states[k], t=float(self.times[k]))

    def truncated(self, n_steps: int) -> "Trajectory":
        """Copy containing only the first n_steps control steps."""
        return Trajectory(
            times=self.times[: n_steps + 1].copy(),
            states=self.states[: n_steps + 1].copy(),
            inputs=self.inputs[:n_steps].copy(),
            rho=self.rho[:n_steps].copy(),
            delta=self.delta[:n_steps].copy(),
            solve_ms=self.solve_ms[:n_steps].copy(),
            dt_ctrl=self.dt_ctrl,
        )


@dataclass(frozen=True)
class RunMetrics:
    """Scalar summary of a run; t_final is None when never converged."""

    t_final: Optional[float]
    energy: float
    tv_chatter: float
    max_hw_violation: float
    max_u: float
    wall_clock: float

    def as_dict(self) -> dict:
        return {
            "t_final": self.t_final,
            "energy": self.energy,
            "tv_chatter": self.tv_chatter,
            "max_hw_violation": self.max_hw_violation,
            "max_u": self.max_u,
            "wall_clock": self.wall_clock,
        }


def run_closed_loop(
    model: PlantModel,
    controller,
    x0: SpacecraftState,
    horizon: float,
    f_ctrl: float = 10.0,
    d: Optional[DisturbanceModel] = None,
    dt_sub: float = 0.01,
    log_substeps: bool = False,
) -> Trajectory:
    """ZOH loop: controller at each control step, plant substepped between.

    Controller or integrator failures raise SimulationAborted carrying the
    partial trajectory.
    """
    if horizon <= 0.0 or f_ctrl <= 0.0:
        raise ValueError("horizon and f_ctrl must be positive")
    dt_ctrl = 1.0 / f_ctrl
    nsub = int(round(dt_ctrl / dt_sub))
    if nsub < 1 or abs(nsub * dt_sub - dt_ctrl) > 1e-12:
        raise ValueError("integrator substep must divide the control period")
    n_steps = int(round(horizon * f_ctrl))

    times = np.arange(n_steps + 1) * dt_ctrl
    states = np.empty((n_steps + 1, 9))
    inputs = np.empty((n_steps, 3))
    rho = np.full(n_steps, np.nan)
    delta = np.full(n_steps, np.nan)
    solve_ms = np.full(n_steps, np.nan)
    fine_t: list = []
    fine_x: list = []

    state = SpacecraftState(
        sigma=np.asarray(x0.sigma, float).copy(),
        omega=np.asarray(x0.omega, float).copy(),
        h_w=np.asarray(x0.h_w, float).copy(),
        t=0.0,
    )
    states[0] = state.as_vector()
    if log_substeps:
        fine_t.append(0.0)
        fine_x.append(states[0].copy())

    def _partial(k):
        return Trajectory(
            times=times[: k + 1].copy(), states=states[: k + 1].copy(),
            inputs=inputs[:k].copy(), rho=rho[:k].copy(), delta=delta[:k].copy(),
            solve_ms=solve_ms[:k].copy(), dt_ctrl=dt_ctrl,
        )

    for k in range(n_steps):
        try:
            out = controller.step(model, state)
            inputs[k] = out.u
            if out.rho is not None:
                rho[k] = out.rho
            if out.delta is not None:
                delta[k] = out.delta
            solve_ms[k] = 1e3 * out.solve_time
            if log_substeps:
                for _ in range(nsub):
                    state = advance_zoh(model, state, out.u, d, dt_sub, 1)
                    fine_t.append(state.t)
                    fine_x.append(state.as_vector())
            else:
                state = advance_zoh(model, state, out.u, d, dt_sub, nsub)
        except AttsafeError as exc:
            raise SimulationAborted(
                f"run aborted at step {k} (t={k * dt_ctrl:.2f} s): {exc}",
                trajectory=_partial(k),
            ) from exc
        # re-anchor time to the exact control grid to avoid float accumulation
        state = SpacecraftState(sigma=state.sigma, omega=state.omega, h_w=state.h_w,
                                t=float(times[k + 1]))
        states[k + 1] = state.as_vector()

    return Trajectory(
        times=times, states=states, inputs=inputs, rho=rho, delta=delta,
        solve_ms=solve_ms, dt_ctrl=dt_ctrl,
        times_fine=np.array(fine_t) if log_substeps else None,
        states_fine=np.array(fine_x) if log_substeps else None,
    )


def in_terminal_set(states: np.ndarray, sigma_tol: float = SIGMA_TOL,
                    omega_tol: float = OMEGA_TOL) -> np.ndarray:
    """Boolean mask of epochs inside T = {|sigma|_inf <= tol, |omega|_inf <= tol}."""
    sig_ok = np.max(np.abs(states[:, 0:3]), axis=1) <= sigma_tol
    om_ok = np.max(np.abs(states[:, 3:6]), axis=1) <= omega_tol
    return sig_ok & om_ok


def detect_t_final(traj: Trajectory, sigma_tol: float = SIGMA_TOL,
                   omega_tol: float = OMEGA_TOL) -> Optional[float]:
    """Earliest logged epoch after which every sample stays in the terminal set.

    Returns None when the final epoch is already outside (never converged).
    """
    inside = in_terminal_set(traj.states, sigma_tol, omega_tol)
    if not inside[-1]:
        return None
    outside = np.where(~inside)[0]
    first = 0 if outside.size == 0 else int(outside[-1]) + 1
    return float(traj.times[first])


def compute_metrics(traj: Trajectory, hw_max: float = 0.5) -> RunMetrics:
    """Energy (rectangle rule, truncated at t_final when converged), total
    variation of u, and peak constraint quantities."""
    t_final = detect_t_final(traj)
    dt = traj.dt_ctrl
    if t_final is None:
        n_e = traj.n_steps
    else:
        n_e = min(traj.n_steps, int(round(t_final / dt)))
    energy = float(np.sum(traj.inputs[:n_e] ** 2) * dt)
    tv = float(np.sum(np.abs(np.diff(traj.inputs, axis=0)))) if traj.n_steps > 1 else 0.0
    hw_peak = float(np.max(np.abs(traj.h_w()))) if traj.states.size else 0.0
    max_u = float(np.max(np.abs(traj.inputs))) if traj.inputs.size else 0.0
    return RunMetrics(
        t_final=t_final,
        energy=energy,
        tv_chatter=tv,
        max_hw_violation=max(0.0, hw_peak - hw_max),
        max_u=max_u,
        wall_clock=float(np.nansum(traj.solve_ms) * 1e-3),
    )


def _fmt(x: float) -> str:
    return "" if np.isnan(x) else repr(float(x))


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Stable CSV format consumed by the plotting component.

    Row k carries the state at epoch k and the input applied over
    [t_k, t_{k+1}); input/diagnostic fields are empty on the final row and
    wherever a controller lacks them.
    """
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    n = traj.states.shape[0]
    for k in range(n):
        cells = [repr(float(traj.times[k]))]
        cells += [repr(float(v)) for v in traj.states[k]]
        if k < traj.n_steps:
            cells += [repr(float(v)) for v in traj.inputs[k]]
            cells += [_fmt(traj.rho[k]), _fmt(traj.delta[k]), _fmt(traj.solve_ms[k])]
        else:
            cells += [""] * 6
        buf.write(",".join(cells) + "\n")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(buf.getvalue())


def read_trajectory_csv(path) -> Trajectory:
    raw = np.genfromtxt(path, delimiter=",", skip_header=1, filling_values=np.nan)
    raw = np.atleast_2d(raw)
    times = raw[:, 0]
    states = raw[:, 1:10]
    inputs = raw[:-1, 10:13]
    dt = float(times[1] - times[0]) if times.size > 1 else 1.0
    return Trajectory(
        times=times, states=states, inputs=inputs,
        rho=raw[:-1, 13], delta=raw[:-1, 14], solve_ms=raw[:-1, 15], dt_ctrl=dt,
    )
