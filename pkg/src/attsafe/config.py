"""Experiment configuration: INI-style file with strict validation.

Sections: [model], [scenario], [study], [compare], [pareto], [montecarlo]
plus one [controller:<variant>] section per controller to run.  Unknown
sections or keys are rejected so typos fail loudly before any simulation.
CLI flags override file values.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .controllers import ControllerConfig, VARIANTS
from .dynamics import PlantModel
from .errors import ConfigError
from .mathcore import euler321_to_mrp

__all__ = ["ExperimentConfig", "load_config", "default_config_text"]

SCHEMA_VERSION = 1
STUDIES = ("compare", "pareto", "montecarlo")

_SECTION_KEYS = {
    "model": {"inertia", "u_max", "h_w_max"},
    "scenario": {"euler321_deg", "horizon", "f_ctrl", "dt_sub"},
    "study": {"kind", "seed"},
    "compare": {"ocp_segments"},
    "pareto": {"t_grid", "nu_grid", "alpha_grid", "segments", "horizon"},
    "montecarlo": {"seeds", "alpha", "horizon"},
}

_CONTROLLER_KEYS = {
    "pd-sat": {"k_p", "k_d"},
    "res-clf-qp": {"k1", "k2", "epsilon", "p_delta"},
    "od-clf-qp": {"nu", "p_rho", "p_delta", "clf_mode"},
    "od-clf-cbf-qp": {"nu", "alpha", "p_rho", "p_delta", "clf_mode"},
}


@dataclass
class ExperimentConfig:
    model: PlantModel
    euler321_deg: np.ndarray
    horizon: float
    f_ctrl: float
    dt_sub: float
    study: str
    seed: int
    controllers: list          # [(variant, ControllerConfig), ...] in file order
    ocp_segments: int
    pareto_t_grid: np.ndarray
    pareto_nu_grid: np.ndarray
    pareto_alpha_grid: np.ndarray
    pareto_segments: int
    pareto_horizon: float
    mc_seeds: int
    mc_alpha: float
    mc_horizon: float
    raw: dict = field(default_factory=dict)

    def sigma0(self) -> np.ndarray:
        return euler321_to_mrp(np.radians(self.euler321_deg))

    def controller_config(self, variant: str) -> ControllerConfig:
        for name, cfg in self.controllers:
            if name == variant:
                return cfg
        raise ConfigError(f"no [controller:{variant}] section in the config")

    def resolved(self) -> dict:
        """Plain-dict echo embedded in every report (with the schema version)."""
        return {
            "schema_version": SCHEMA_VERSION,
            "study": self.study,
            "seed": self.seed,
            "model": {
                "inertia": np.asarray(self.model.J).tolist(),
                "u_max": self.model.u_max,
                "h_w_max": self.model.h_w_max,
            },
            "scenario": {
                "euler321_deg": np.asarray(self.euler321_deg).tolist(),
                "horizon": self.horizon,
                "f_ctrl": self.f_ctrl,
                "dt_sub": self.dt_sub,
            },
            "controllers": {
                name: {"gains": {k: (v.tolist() if hasattr(v, "tolist") else v)
                                 for k, v in cfg.gains.items()},
                       "clf_mode": cfg.clf_mode}
                for name, cfg in self.controllers
            },
            "compare": {"ocp_segments": self.ocp_segments},
            "pareto": {
                "t_grid": self.pareto_t_grid.tolist(),
                "nu_grid": self.pareto_nu_grid.tolist(),
                "alpha_grid": self.pareto_alpha_grid.tolist(),
                "segments": self.pareto_segments,
                "horizon": self.pareto_horizon,
            },
            "montecarlo": {"seeds": self.mc_seeds, "alpha": self.mc_alpha,
                           "horizon": self.mc_horizon},
        }


def default_config_text() -> str:
    return resources.files("attsafe").joinpath("default.cfg").read_text(encoding="utf-8")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.replace(",", " ").split()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse float list from {text!r}") from exc


def _matrix(text: str, shape) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip()]
    mat = np.array([_floats(r) for r in rows])
    if mat.shape != shape:
        raise ConfigError(f"expected a {shape} matrix, got {mat.shape}")
    return mat


def _get_float(sec, key, default=None):
    if key in sec:
        try:
            return float(sec[key])
        except ValueError as exc:
            raise ConfigError(f"bad float for {key}: {sec[key]!r}") from exc
    if default is None:
        raise ConfigError(f"missing required key {key}")
    return default


def load_config(path=None, text=None, overrides=None) -> ExperimentConfig:
    """Parse and validate a config file (or raw text); None loads the built-in
    defaults.  overrides is a dict like {'study': 'compare', 'seed': 3}."""
    parser = configparser.ConfigParser(interpolation=None)
    if text is None:
        text = default_config_text() if path is None else open(path, encoding="utf-8").read()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc

    controllers = []
    for section in parser.sections():
        if section.startswith("controller:"):
            variant = section.split(":", 1)[1]
            if variant not in VARIANTS:
                raise ConfigError(f"unknown controller variant in [{section}]")
            allowed = _CONTROLLER_KEYS[variant]
            unknown = set(parser[section]) - allowed
            if unknown:
                raise ConfigError(f"unknown keys {sorted(unknown)} in [{section}]")
            gains = {}
            clf_mode = "per-step-R"
            for key, val in parser[section].items():
                if key == "clf_mode":
                    clf_mode = val.strip()
                else:
                    gains[key] = float(val)
            try:
                controllers.append((variant, ControllerConfig(variant, gains, clf_mode)))
            except ValueError as exc:
                raise ConfigError(f"[{section}]: {exc}") from exc
        elif section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        else:
            unknown = set(parser[section]) - _SECTION_KEYS[section]
            if unknown:
                raise ConfigError(f"unknown keys {sorted(unknown)} in [{section}]")

    for required in ("model", "scenario"):
        if required not in parser:
            raise ConfigError(f"missing required section [{required}]")

    model_sec = parser["model"]
    try:
        model = PlantModel(
            J=_matrix(model_sec.get("inertia", ""), (3, 3)),
            u_max=_get_float(model_sec, "u_max"),
            h_w_max=_get_float(model_sec, "h_w_max"),
        )
    except ValueError as exc:
        raise ConfigError(f"[model]: {exc}") from exc

    scen = parser["scenario"]
    euler = _floats(scen.get("euler321_deg", "140 20 100"))
    if euler.shape != (3,):
        raise ConfigError("euler321_deg must have 3 entries")
    horizon = _get_float(scen, "horizon", 120.0)
    f_ctrl = _get_float(scen, "f_ctrl", 10.0)
    dt_sub = _get_float(scen, "dt_sub", 0.01)
    if horizon <= 0 or f_ctrl <= 0 or dt_sub <= 0:
        raise ConfigError("horizon, f_ctrl and dt_sub must be positive")

    study_sec = parser["study"] if "study" in parser else {}
    study = study_sec.get("kind", "compare").strip()
    seed = int(study_sec.get("seed", "0"))

    comp = parser["compare"] if "compare" in parser else {}
    ocp_segments = int(comp.get("ocp_segments", "100"))

    par = parser["pareto"] if "pareto" in parser else {}
    t_grid = _floats(par.get("t_grid", "25 35 50 70 95 125"))
    nu_grid = _floats(par.get("nu_grid", "1 3 10"))
    alpha_grid = _floats(par.get("alpha_grid", "0.05 0.2 1.0"))
    p_segments = int(par.get("segments", "100"))
    p_horizon = float(par.get("horizon", "150"))

    mc = parser["montecarlo"] if "montecarlo" in parser else {}
    mc_seeds = int(mc.get("seeds", "20"))
    mc_alpha = float(mc.get("alpha", "1.0"))
    mc_horizon = float(mc.get("horizon", str(horizon)))

    cfg = ExperimentConfig(
        model=model,
        euler321_deg=euler,
        horizon=horizon,
        f_ctrl=f_ctrl,
        dt_sub=dt_sub,
        study=study,
        seed=seed,
        controllers=controllers,
        ocp_segments=ocp_segments,
        pareto_t_grid=t_grid,
        pareto_nu_grid=nu_grid,
        pareto_alpha_grid=alpha_grid,
        pareto_segments=p_segments,
        pareto_horizon=p_horizon,
        mc_seeds=mc_seeds,
        mc_alpha=mc_alpha,
        mc_horizon=mc_horizon,
    )

    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key == "study":
            cfg.study = val
        elif key == "seed":
            cfg.seed = int(val)
        else:
            raise ConfigError(f"unknown override {key}")

    if cfg.study not in STUDIES:
        raise ConfigError(f"unknown study {cfg.study!r}, expected one of {STUDIES}")
    if cfg.study == "compare" and not cfg.controllers:
        raise ConfigError("compare study needs at least one [controller:*] section")
    if cfg.study == "montecarlo" and cfg.mc_seeds < 1:
        raise ConfigError("montecarlo needs seeds >= 1")
    if cfg.study == "pareto":
        if not (len(cfg.pareto_t_grid) and len(cfg.pareto_nu_grid) and len(cfg.pareto_alpha_grid)):
            raise ConfigError("pareto grids must be nonempty")
        if np.any(np.diff(cfg.pareto_t_grid) <= 0):
            raise ConfigError("pareto t_grid must be increasing")
    return cfg
