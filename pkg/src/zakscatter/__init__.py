"""Scattering-function estimation for overspread channels via the Zak transform."""

from .channel import GridSpec, SupportCover, build_cover, full_cover, discretize
from .errors import ZakScatterError
from .harness import ExperimentConfig, WeightSpec, mse_curve, run_experiment, slope_fit
from .tfcore import ambiguity, build_K, build_frame, spectral_check, tf_shift

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig", "GridSpec", "SupportCover", "WeightSpec", "ZakScatterError",
    "ambiguity", "build_K", "build_cover", "build_frame", "discretize", "full_cover",
    "mse_curve", "run_experiment", "slope_fit", "spectral_check", "tf_shift",
]
