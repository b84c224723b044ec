"""The four figure renderers.

Output is deterministic SVG: a fixed style, a fixed hash salt for element
ids, and no embedded dates, so re-rendering identical inputs is
byte-stable (useful for diffing experiment reruns).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, read_meta, read_pareto, read_trajectory, read_tunings

U_MAX_DEFAULT = 0.123
HW_MAX_DEFAULT = 0.5

_STYLE = {
    "figure.dpi": 110,
    "svg.hashsalt": "plotkit",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
}
_SAVE = {"format": "svg", "metadata": {"Date": None}}

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


@dataclass
class FigureSpec:
    """What to draw: figure id, input paths, output path, component index."""

    figure: str
    inputs: list
    output: str
    component: int = 3          # 3rd components shown by default
    u_max: float = U_MAX_DEFAULT
    hw_max: float = HW_MAX_DEFAULT


def _label(path) -> str:
    return Path(path).stem


def _component_traces(data: dict, comp: int):
    c = str(comp)
    return data["t"], data["sig" + c], data["om" + c], data["hw" + c], data["u" + c]


def _trajectory_panels(specs, comp, u_max, hw_max, alpha=1.0, legend=True):
    fig, axes = plt.subplots(4, 1, figsize=(6.0, 8.0), sharex=True)
    labels = [rf"$\sigma_{comp}$", rf"$\omega_{comp}$ [rad/s]",
              rf"$h_{{w{comp}}}$ [N m s]", rf"$u_{comp}$ [N m]"]
    for i, (data, color) in enumerate(specs):
        t, sig, om, hw, u = _component_traces(data, comp)
        kw = {"color": color, "alpha": alpha, "linewidth": 1.0}
        axes[0].plot(t, sig, label=_label(data["path"]) if legend else None, **kw)
        axes[1].plot(t, om, **kw)
        axes[2].plot(t, hw, **kw)
        axes[3].step(t, u, where="post", **kw)
    for level, ax in ((hw_max, axes[2]), (u_max, axes[3])):
        ax.axhline(level, color="k", linestyle="--", linewidth=0.8)
        ax.axhline(-level, color="k", linestyle="--", linewidth=0.8)
    for ax, lab in zip(axes, labels):
        ax.set_ylabel(lab)
    axes[3].set_xlabel("time [s]")
    if legend:
        axes[0].legend(loc="upper right")
    fig.align_ylabels(axes)
    fig.tight_layout()
    return fig


def render_trajectories(spec: FigureSpec):
    if not spec.inputs:
        raise SchemaError("trajectories figure needs at least one trajectory CSV")
    datasets = [read_trajectory(p) for p in spec.inputs]
    specs = [(d, _COLORS[i % len(_COLORS)]) for i, d in enumerate(datasets)]
    return _trajectory_panels(specs, spec.component, spec.u_max, spec.hw_max)


def render_montecarlo(spec: FigureSpec):
    if not spec.inputs:
        raise SchemaError("montecarlo figure needs at least one trajectory CSV")
    datasets = [read_trajectory(p) for p in spec.inputs]
    specs = [(d, "#1f77b4") for d in datasets]
    fig = _trajectory_panels(specs, spec.component, spec.u_max, spec.hw_max,
                             alpha=0.35, legend=False)
    fig.suptitle(f"{len(datasets)} randomized runs", y=0.995, fontsize=9)
    return fig


def render_decay(spec: FigureSpec):
    if not spec.inputs:
        raise SchemaError("decay figure needs at least one trajectory CSV")
    datasets = [read_trajectory(p) for p in spec.inputs]
    for d in datasets:
        if not np.any(np.isfinite(d["rho"])) and not np.any(np.isfinite(d["delta"])):
            raise SchemaError(f"{d['path']}: columns 'rho'/'delta' are empty "
                              "(controller has no decay diagnostics)")
    fig, axes = plt.subplots(2, 1, figsize=(6.0, 4.5), sharex=True)
    for i, d in enumerate(datasets):
        color = _COLORS[i % len(_COLORS)]
        n = len(d["rho"])
        axes[0].plot(d["t"][:n], d["rho"], color=color, linewidth=1.0,
                     label=_label(d["path"]))
        axes[1].plot(d["t"][:n], d["delta"], color=color, linewidth=1.0)
    axes[0].set_ylabel(r"decay weight $\rho$")
    axes[0].legend(loc="lower right")
    axes[1].set_ylabel(r"slack $\delta$")
    axes[1].set_xlabel("time [s]")
    fig.align_ylabels(axes)
    fig.tight_layout()
    return fig


def render_pareto(spec: FigureSpec):
    if len(spec.inputs) < 2:
        raise SchemaError("pareto figure needs pareto.csv and tunings.csv "
                          "(optional: metadata JSON)")
    pareto = read_pareto(spec.inputs[0])
    tunings = read_tunings(spec.inputs[1])
    u_max = spec.u_max
    if len(spec.inputs) >= 3:
        u_max = float(read_meta(spec.inputs[2])["u_max"])

    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ok = np.array([s == "optimal" for s in pareto["status"]])
    if not np.any(ok):
        raise SchemaError(f"{spec.inputs[0]}: no optimal points on the curve")
    t_c, e_c = pareto["t_final"][ok], pareto["energy"][ok]
    ax.loglog(t_c, e_c, "o-", color="#1f77b4", label="energy-optimal curve")

    t_grid = np.geomspace(min(t_c.min(), 10.0), max(t_c.max(), 130.0), 50)
    ax.loglog(t_grid, 3.0 * u_max**2 * t_grid, "k--", linewidth=0.9,
              label="max control effort")

    nus = sorted(set(tunings["nu"]))
    markers = ["s", "^", "D", "v", "P", "X"]
    for i, nu in enumerate(nus):
        sel = [j for j in range(len(tunings["nu"]))
               if tunings["nu"][j] == nu and tunings["status"][j] == "converged"]
        if sel:
            ax.loglog(tunings["t_final"][sel], tunings["energy"][sel],
                      markers[i % len(markers)], linestyle="none", markersize=6,
                      color=_COLORS[(i + 1) % len(_COLORS)],
                      label=rf"proposed, $\nu$={nu:g}")
    ax.set_xlabel("maneuver time [s]")
    ax.set_ylabel(r"input energy $\int \|u\|^2 dt$")
    ax.legend(loc="lower left")
    fig.tight_layout()
    return fig


FIGURES = {
    "pareto": render_pareto,
    "trajectories": render_trajectories,
    "decay": render_decay,
    "montecarlo": render_montecarlo,
}


def render(spec: FigureSpec) -> Path:
    """Validate inputs, draw the requested figure, write deterministic SVG.

    No output file is created when validation or drawing fails.
    """
    if spec.figure not in FIGURES:
        raise SchemaError(f"unknown figure id {spec.figure!r}; "
                          f"expected one of {sorted(FIGURES)}")
    if spec.component not in (1, 2, 3):
        raise SchemaError("component must be 1, 2 or 3")
    with plt.rc_context(_STYLE):
        fig = FIGURES[spec.figure](spec)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        try:
            fig.savefig(out, **_SAVE)
        finally:
            plt.close(fig)
    return out
