"""The three experiment studies: compare, pareto, montecarlo.

Each study writes its artifacts (trajectory CSVs plus a JSON/CSV report)
into an output directory and also returns the report dict.  Runs fan out
over a process pool when jobs > 1; aggregation is ordered by run index, so
results do not depend on completion order.  Timing entries live in a
separate "timing" block of each report: everything outside that block is
reproducible byte-for-byte from (config, seed).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .controllers import OD_CLF_CBF_QP, ControllerConfig, make_controller
from .dynamics import PlantModel, SpacecraftState
from .errors import SimulationAborted
from .mathcore import random_orientation
from .ocp import pareto_sweep, solve_ocp
from .sim import compute_metrics, detect_t_final, run_closed_loop, write_trajectory_csv

__all__ = ["run_compare", "run_pareto", "run_montecarlo"]


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _closed_loop_task(task: dict):
    """Worker entry: rebuild model/controller from plain data and run."""
    model = PlantModel(J=np.array(task["J"]), u_max=task["u_max"], h_w_max=task["h_w_max"])
    ctrl = make_controller(
        ControllerConfig(task["variant"], dict(task["gains"]), task["clf_mode"])
    )
    x0 = SpacecraftState.rest(np.array(task["sigma0"]))
    t0 = time.perf_counter()
    try:
        traj = run_closed_loop(
            model, ctrl, x0, horizon=task["horizon"], f_ctrl=task["f_ctrl"],
            dt_sub=task["dt_sub"],
        )
        aborted = None
    except SimulationAborted as exc:
        traj = exc.trajectory
        aborted = str(exc)
    wall = time.perf_counter() - t0
    return traj, compute_metrics(traj, hw_max=task["h_w_max"]), wall, aborted


def _make_task(config: ExperimentConfig, variant: str, ctrl_cfg: ControllerConfig,
               sigma0: np.ndarray, horizon: float) -> dict:
    return {
        "J": np.asarray(config.model.J).tolist(),
        "u_max": config.model.u_max,
        "h_w_max": config.model.h_w_max,
        "variant": variant,
        "gains": {k: (v.tolist() if hasattr(v, "tolist") else v) for k, v in ctrl_cfg.gains.items()},
        "clf_mode": ctrl_cfg.clf_mode,
        "sigma0": np.asarray(sigma0).tolist(),
        "horizon": horizon,
        "f_ctrl": config.f_ctrl,
        "dt_sub": config.dt_sub,
    }


def _map_ordered(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [_closed_loop_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_closed_loop_task, tasks))


def _resample_controls(traj, t_final: float, n: int) -> np.ndarray:
    """ZOH inputs of a closed-loop run resampled onto n segments of [0, t_final]."""
    mid = (np.arange(n) + 0.5) * (t_final / n)
    src = np.minimum((mid / traj.dt_ctrl).astype(int), traj.n_steps - 1)
    return traj.inputs[src]


def run_compare(config: ExperimentConfig, out_dir, jobs: int = 1) -> dict:
    """Closed-loop runs for every configured controller plus the open-loop
    energy-optimal baseline at the proposed controller's maneuver time."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sigma0 = config.sigma0()

    tasks = [
        _make_task(config, variant, cfg, sigma0, config.horizon)
        for variant, cfg in config.controllers
    ]
    results = _map_ordered(tasks, jobs)

    controllers = {}
    timing = {}
    failures = []
    trajs = {}
    for (variant, _), (traj, metrics, wall, aborted) in zip(config.controllers, results):
        csv_name = f"{variant}.csv"
        write_trajectory_csv(traj, out / csv_name)
        trajs[variant] = traj
        entry = metrics.as_dict()
        entry.pop("wall_clock")
        entry["hw_violated"] = metrics.max_hw_violation > 0.0
        entry["csv"] = csv_name
        if aborted:
            entry["aborted"] = aborted
            failures.append(variant)
        controllers[variant] = entry
        timing[variant] = {"controller_s": metrics.wall_clock, "run_wall_s": wall}

    # open-loop baseline at the matched maneuver time
    ocp_entry = None
    t_match = None
    if OD_CLF_CBF_QP in trajs:
        t_match = detect_t_final(trajs[OD_CLF_CBF_QP])
    if t_match is None:
        converged = [controllers[v]["t_final"] for v, _ in config.controllers
                     if controllers[v]["t_final"] is not None]
        t_match = max(converged) if converged else None
    if t_match is not None and t_match > 0.0:
        u_init = None
        if OD_CLF_CBF_QP in trajs:
            u_init = _resample_controls(trajs[OD_CLF_CBF_QP], t_match, config.ocp_segments)
        model = config.model
        x0 = SpacecraftState.rest(sigma0)
        t0 = time.perf_counter()
        ocp = solve_ocp(model, x0, t_match, config.ocp_segments, u_init=u_init)
        ocp_wall = time.perf_counter() - t0
        write_trajectory_csv(ocp.trajectory, out / "ocp.csv")
        ocp_entry = {
            "t_final": t_match,
            "energy": ocp.energy,
            "status": ocp.status.status,
            "max_violation": ocp.status.max_violation,
            "csv": "ocp.csv",
        }
        timing["ocp"] = {"solve_wall_s": ocp_wall}
        if not ocp.status.converged:
            failures.append("ocp")

    report = {
        "schema_version": 1,
        "study": "compare",
        "config": config.resolved(),
        "controllers": controllers,
        "ocp": ocp_entry,
        "failures": failures,
        "timing": timing,
    }
    _write_json(out / "metrics.json", report)
    return report


def run_pareto(config: ExperimentConfig, out_dir, jobs: int = 1) -> dict:
    """Energy-vs-time frontier: OCP sweep over the horizon grid plus the
    proposed controller over the (nu, alpha) tuning grid."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sigma0 = config.sigma0()
    x0 = SpacecraftState.rest(sigma0)

    t0 = time.perf_counter()
    sweep = pareto_sweep(config.model, x0, config.pareto_t_grid, config.pareto_segments)
    sweep_wall = time.perf_counter() - t0
    with open(out / "pareto.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("t_final,energy,status\n")
        for t, energy, status, _ in sweep:
            f.write(f"{t!r},{energy!r},{status.status}\n")

    base = config.controller_config(OD_CLF_CBF_QP)
    tunings = []
    tasks = []
    for nu in config.pareto_nu_grid:
        for alpha in config.pareto_alpha_grid:
            gains = dict(base.gains)
            gains["nu"] = float(nu)
            gains["alpha"] = float(alpha)
            cfg = ControllerConfig(OD_CLF_CBF_QP, gains, base.clf_mode)
            tunings.append((float(nu), float(alpha)))
            tasks.append(_make_task(config, OD_CLF_CBF_QP, cfg, sigma0, config.pareto_horizon))
    results = _map_ordered(tasks, jobs)

    rows = []
    for (nu, alpha), (traj, metrics, _, aborted) in zip(tunings, results):
        status = "converged" if metrics.t_final is not None and not aborted else "not-converged"
        rows.append(
            {"nu": nu, "alpha": alpha, "t_final": metrics.t_final,
             "energy": metrics.energy, "status": status,
             "max_hw_violation": metrics.max_hw_violation, "max_u": metrics.max_u}
        )
    with open(out / "tunings.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("nu,alpha,t_final,energy,status\n")
        for r in rows:
            tf = "" if r["t_final"] is None else repr(r["t_final"])
            f.write(f"{r['nu']!r},{r['alpha']!r},{tf},{r['energy']!r},{r['status']}\n")

    report = {
        "schema_version": 1,
        "study": "pareto",
        "config": config.resolved(),
        "u_max": config.model.u_max,
        "ocp_curve": [
            {"t_final": t, "energy": e, "status": s.status, "max_violation": s.max_violation}
            for t, e, s, _ in sweep
        ],
        "tunings": rows,
        "timing": {"sweep_wall_s": sweep_wall},
    }
    _write_json(out / "pareto_meta.json", report)
    return report


def run_montecarlo(config: ExperimentConfig, out_dir, jobs: int = 1) -> dict:
    """Proposed controller from randomized initial orientations."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = config.controller_config(OD_CLF_CBF_QP)
    gains = dict(base.gains)
    gains["alpha"] = config.mc_alpha

    tasks = []
    seeds = [config.seed + i for i in range(config.mc_seeds)]
    for s in seeds:
        sigma0 = random_orientation(s)
        cfg = ControllerConfig(OD_CLF_CBF_QP, dict(gains), base.clf_mode)
        tasks.append(_make_task(config, OD_CLF_CBF_QP, cfg, sigma0, config.mc_horizon))
    results = _map_ordered(tasks, jobs)

    per_seed = []
    for s, (traj, metrics, _, aborted) in zip(seeds, results):
        csv_name = f"mc_seed{s:03d}.csv"
        write_trajectory_csv(traj, out / csv_name)
        per_seed.append(
            {"seed": s, "t_final": metrics.t_final, "energy": metrics.energy,
             "max_hw_violation": metrics.max_hw_violation, "max_u": metrics.max_u,
             "converged": metrics.t_final is not None and not aborted, "csv": csv_name}
        )

    energies = np.array([p["energy"] for p in per_seed])
    t_finals = [p["t_final"] for p in per_seed if p["t_final"] is not None]
    n_conv = sum(p["converged"] for p in per_seed)
    report = {
        "schema_version": 1,
        "study": "montecarlo",
        "config": config.resolved(),
        "n_seeds": len(seeds),
        "converged": int(n_conv),
        "convergence_rate": n_conv / len(seeds),
        "max_hw_violation": float(max(p["max_hw_violation"] for p in per_seed)),
        "max_u": float(max(p["max_u"] for p in per_seed)),
        "energy": {
            "mean": float(energies.mean()),
            "min": float(energies.min()),
            "max": float(energies.max()),
            "std": float(energies.std()),
        },
        "t_final": {
            "mean": float(np.mean(t_finals)) if t_finals else None,
            "min": float(np.min(t_finals)) if t_finals else None,
            "max": float(np.max(t_finals)) if t_finals else None,
        },
        "per_seed": per_seed,
    }
    _write_json(out / "montecarlo.json", report)
    return report
