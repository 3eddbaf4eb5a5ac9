"""Gaussian-state simulation of unitary averaging on noisy linear-optical circuits."""

from .analytics import (
    PowerLawModel,
    SingleModeChannelModel,
    base_case,
    enhancement,
    power_law_fidelity,
    power_law_probability,
)
from .circuit import BeamSplitter, CircuitSpec, NoiseModel, Phase, Squeeze, clements_mesh, random_clements
from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    ApproximationError,
    ConfigError,
    DimensionError,
    NumericalError,
    OracleBoundsError,
    SaturatedEnhancement,
    TruncationError,
    UASimError,
)
from .protocol import EnsembleResult, UAConfig, integrate_ensemble, run_ensemble, run_single_sample

__version__ = "0.1.0"

__all__ = [
    "BeamSplitter", "CircuitSpec", "NoiseModel", "Phase", "Squeeze", "clements_mesh", "random_clements",
    "UAConfig", "EnsembleResult", "run_ensemble", "run_single_sample", "integrate_ensemble",
    "SingleModeChannelModel", "PowerLawModel", "base_case", "enhancement",
    "power_law_fidelity", "power_law_probability",
    "ExperimentConfig", "load_config", "parse_config",
    "UASimError", "DimensionError", "NumericalError", "ApproximationError", "TruncationError",
    "OracleBoundsError", "SaturatedEnhancement", "ConfigError",
]
