"""End-to-end: drive the simulator CLI, then render every figure from its
outputs.  The simulator is consumed strictly through its command line and
file formats."""

import os
import subprocess
import sys
from pathlib import Path

import pytest

from plotkit import FigureSpec, render

REPO = Path(__file__).resolve().parent.parent.parent
SIM_SRC = REPO / "src"

FAST_CFG = """
[model]
inertia = 1.8140 -0.1185 0.0275 ; -0.1185 1.7350 0.0169 ; 0.0275 0.0169 3.4320
u_max = 0.123
h_w_max = 0.50

[scenario]
euler321_deg = 140 20 100
horizon = 60.0
f_ctrl = 10.0
dt_sub = 0.01

[study]
kind = compare
seed = 0

[controller:pd-sat]
k_p = 0.4
k_d = 0.8

[controller:od-clf-qp]
nu = 10.0
p_rho = 0.1
p_delta = 100.0

[controller:od-clf-cbf-qp]
nu = 10.0
alpha = 0.05
p_rho = 0.1
p_delta = 100.0

[compare]
ocp_segments = 40

[pareto]
t_grid = 35 50
nu_grid = 3 10
alpha_grid = 0.1 1.0
segments = 40
horizon = 60.0

[montecarlo]
seeds = 3
alpha = 1.0
horizon = 60.0
"""


def _run_study(study, cfg_file, out_dir):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(SIM_SRC) + os.pathsep + env.get("PYTHONPATH", "")
    proc = subprocess.run(
        [sys.executable, "-m", "attsafe.cli", "--study", study,
         "--config", str(cfg_file), "--out", str(out_dir), "--jobs", "2"],
        capture_output=True, text=True, timeout=600, env=env, cwd=REPO,
    )
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="module")
def study_outputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("studies")
    cfg_file = base / "fast.cfg"
    cfg_file.write_text(FAST_CFG, encoding="utf-8")
    out = {}
    for study in ("compare", "pareto", "montecarlo"):
        out[study] = _run_study(study, cfg_file, base / study)
    return out


def test_all_four_figures_from_study_outputs(study_outputs, tmp_path):
    compare = study_outputs["compare"]
    pareto = study_outputs["pareto"]
    mc = study_outputs["montecarlo"]

    specs = {
        "pareto": [pareto / "pareto.csv", pareto / "tunings.csv",
                   pareto / "pareto_meta.json"],
        "trajectories": sorted(compare.glob("*.csv")),
        "decay": [compare / "od-clf-cbf-qp.csv", compare / "od-clf-qp.csv"],
        "montecarlo": sorted(mc.glob("mc_seed*.csv")),
    }
    for figure, inputs in specs.items():
        assert inputs, f"no inputs found for {figure}"
        first = render(FigureSpec(figure=figure, inputs=[str(p) for p in inputs],
                                  output=str(tmp_path / f"{figure}.svg")))
        again = render(FigureSpec(figure=figure, inputs=[str(p) for p in inputs],
                                  output=str(tmp_path / f"{figure}_again.svg")))
        assert first.read_bytes() == again.read_bytes(), f"{figure} not byte-stable"
        assert first.stat().st_size > 5_000
