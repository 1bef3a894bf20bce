"""Experiment configuration: a nested key-value document (YAML or JSON)."""
from __future__ import annotations

import copy
import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .discretize import RadialGrid
from .errors import BlowupLabError, ConfigError
from .integrate import StepControl
from .model import ProblemSpec, build_quadratic_initial_data


@dataclass
class InitialDataConfig:
    family: str = "quadratic"
    a: float = -1.0
    b_max: float = 1000.0


@dataclass
class SpecConfig:
    n: int = 1
    R: float = 1.0
    p: float = 1.0
    q: float = 2.0
    lam: float = 1.0
    u0: InitialDataConfig = field(default_factory=InitialDataConfig)


@dataclass
class GridConfig:
    N: int = 256


@dataclass
class ControlConfig:
    cfl_safety: float = 0.4
    delta_max: float = 0.05
    u_stop: float = 25.0
    t_max: float = 10.0


@dataclass
class AnalysisConfig:
    beta: Optional[float] = None
    fit_window: Union[str, list] = "resolved"
    epsilon_fraction: float = 0.9
    interior_fraction: float = 0.9
    T_cmp: float = 1.0
    C_up: float = 10.0
    theorem4: bool = False
    oracle_window: Optional[list] = None
    oracle_radii: list = field(default_factory=lambda: [0.0, 0.3, 0.6, 0.9])


@dataclass
class OutputConfig:
    dir: str = "out"


@dataclass
class ExperimentConfig:
    spec: SpecConfig = field(default_factory=SpecConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    # ----------------------------------------------------------------- building
    def problem(self) -> ProblemSpec:
        s = self.spec
        spec = ProblemSpec(n=s.n, R=s.R, p=s.p, q=s.q, lam=s.lam)
        if s.u0.family != "quadratic":
            raise ConfigError(f"unknown initial-data family {s.u0.family!r}")
        return spec.with_initial_data(build_quadratic_initial_data(s.u0.a, spec, s.u0.b_max))

    def radial_grid(self) -> RadialGrid:
        return RadialGrid(self.grid.N, self.spec.R)

    def step_control(self) -> StepControl:
        c = self.control
        return StepControl(cfl_safety=c.cfl_safety, delta_max=c.delta_max, u_stop=c.u_stop,
                           t_max=c.t_max)

    def analysis_kwargs(self) -> dict:
        a = self.analysis
        return dict(beta=a.beta, fit_window=a.fit_window, epsilon_fraction=a.epsilon_fraction,
                    interior_fraction=a.interior_fraction, T_cmp=a.T_cmp, C_up=a.C_up,
                    theorem4=a.theorem4)

    def validate(self) -> "ExperimentConfig":
        """Build every runtime object once; any failure becomes :class:`ConfigError`."""
        try:
            spec = self.problem()
            grid = self.radial_grid()
            ctl = self.step_control()
        except ConfigError:
            raise
        except BlowupLabError as exc:
            raise ConfigError(str(exc)) from exc
        u0R = float(spec.u0.value(spec.R))
        if not ctl.u_stop > u0R:
            raise ConfigError(f"control.u_stop={ctl.u_stop} must exceed u0(R)={u0R:.6g}")
        a = self.analysis
        fw = a.fit_window
        if isinstance(fw, str):
            if fw not in ("resolved", "tail"):
                raise ConfigError(f"analysis.fit_window must be 'resolved', 'tail' or [lo, hi]")
        elif not (isinstance(fw, list) and len(fw) == 2 and fw[0] < fw[1]):
            raise ConfigError("analysis.fit_window as a list needs [lo, hi] with lo < hi")
        if a.beta is not None and not a.beta > 0:
            raise ConfigError("analysis.beta must be > 0")
        if not 0 < a.epsilon_fraction <= 1:
            raise ConfigError("analysis.epsilon_fraction must lie in (0, 1]")
        if not 0 <= a.interior_fraction < 1:
            raise ConfigError("analysis.interior_fraction must lie in [0, 1)")
        if not (a.T_cmp > 0 and a.C_up > 0):
            raise ConfigError("analysis.T_cmp and analysis.C_up must be > 0")
        if a.oracle_window is not None:
            ow = a.oracle_window
            if not (isinstance(ow, list) and len(ow) == 2 and 0 < ow[0] < ow[1]):
                raise ConfigError("analysis.oracle_window needs [z, t] with 0 < z < t")
        if grid.R != spec.R:
            raise ConfigError("grid radius mismatch")
        return self

    # ------------------------------------------------------------ serialization
    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["spec"] = {("lambda" if k == "lam" else k): v for k, v in d["spec"].items()}
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a mapping")
        data = copy.deepcopy(data)
        spec = data.get("spec")
        if isinstance(spec, dict) and "lambda" in spec:
            if "lam" in spec:
                raise ConfigError("give either spec.lambda or spec.lam, not both")
            spec["lam"] = spec.pop("lambda")
        return _build(cls, data, "")

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def with_value(self, path: str, value: Any) -> "ExperimentConfig":
        d = self.to_dict()
        node = d
        keys = path.split(".")
        for k in keys[:-1]:
            node = node[k]
        if keys[-1] not in node:
            raise ConfigError(f"unknown configuration key {path!r}")
        node[keys[-1]] = value
        return ExperimentConfig.from_dict(d)


_FLOAT_FIELDS = {"R", "p", "q", "lam", "a", "b_max", "cfl_safety", "delta_max", "u_stop", "t_max",
                 "epsilon_fraction", "interior_fraction", "T_cmp", "C_up"}


def _build(cls, data: dict, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {prefix or '<root>'} must be a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        shown = sorted(("lambda" if k == "lam" else k) for k in unknown)
        raise ConfigError(f"unknown keys in {prefix or '<root>'}: {', '.join(shown)}")
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{prefix}{name}.")
            continue
        if name in _FLOAT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{prefix}{name} must be a number")
            value = float(value)
            if not math.isfinite(value):
                raise ConfigError(f"{prefix}{name} must be finite")
        elif name == "beta" and value is not None:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{prefix}{name} must be a number or null")
            value = float(value)
        elif name in ("n", "N"):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{prefix}{name} must be an integer")
        elif name in ("oracle_window", "oracle_radii") and value is not None:
            if not isinstance(value, list):
                raise ConfigError(f"{prefix}{name} must be a list")
            value = [float(v) for v in value]
        elif name == "fit_window" and isinstance(value, list):
            value = [float(v) for v in value]
        elif name == "theorem4" and not isinstance(value, bool):
            raise ConfigError(f"{prefix}{name} must be true or false")
        kwargs[name] = value
    return cls(**kwargs)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    return ExperimentConfig.from_dict(data or {}).validate()
