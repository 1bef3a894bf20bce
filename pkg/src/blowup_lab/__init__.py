"""Numerical laboratory for semilinear heat equations with exponential reaction
and exponential boundary flux on a ball, blowing up at the boundary."""
from ._kernels import BACKEND
from .analyze import analyze_trace, estimate_blowup_time, fit_rate
from .config import ExperimentConfig, load_config
from .discretize import RadialField, RadialGrid
from .errors import BlowupLabError
from .integrate import StepControl, Trace, run
from .kernel import integral_identity_residual
from .model import ProblemSpec, build_quadratic_initial_data, check_hypotheses

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BlowupLabError",
    "ExperimentConfig",
    "ProblemSpec",
    "RadialField",
    "RadialGrid",
    "StepControl",
    "Trace",
    "analyze_trace",
    "build_quadratic_initial_data",
    "check_hypotheses",
    "estimate_blowup_time",
    "fit_rate",
    "integral_identity_residual",
    "load_config",
    "run",
]
