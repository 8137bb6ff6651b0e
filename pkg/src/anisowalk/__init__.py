"""Spectral and dynamical analysis of one-dimensional coined quantum walks
whose coin converges to different constant coins on the left and right."""

from .coin import (
    CoinField,
    CoinMatrix,
    CoinParams,
    hadamard,
    parametrize,
    reconstruct,
    rotation,
    split_step_profile,
    two_phase,
    verify_short_range,
)
from .errors import NumericalError, ValidationError
from .spectra import INF, SpectralArcs, ThresholdSet, arcs, essential_spectrum, thresholds

__version__ = "0.1.0"

__all__ = [
    "CoinField",
    "CoinMatrix",
    "CoinParams",
    "INF",
    "NumericalError",
    "SpectralArcs",
    "ThresholdSet",
    "ValidationError",
    "arcs",
    "essential_spectrum",
    "hadamard",
    "parametrize",
    "reconstruct",
    "rotation",
    "split_step_profile",
    "thresholds",
    "two_phase",
    "verify_short_range",
]
