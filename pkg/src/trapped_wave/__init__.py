"""Resolvent growth, resonances and exclusion sets for radially symmetric scatterers."""

from .errors import (ConfigError, ContourError, NotApplicableError, NumericalFailure,
                     SingularityError, TruncationError)
from .exclusion import ExclusionParams, ExclusionSet, build_exclusion_set, exponent_prediction
from .modal import ResolventEstimate, modal_determinant, radial_grid, resolvent_norm
from .resonances import Box, Resonance, ResonanceCatalog, count_in_box, find_resonances
from .scatterers import Kind, ScattererSpec, TrappingClass, classify, normalize

__version__ = "0.1.0"

__all__ = [
    "Box", "ConfigError", "ContourError", "ExclusionParams", "ExclusionSet", "Kind",
    "NotApplicableError", "NumericalFailure", "Resonance", "ResonanceCatalog",
    "ResolventEstimate", "ScattererSpec", "SingularityError", "TrappingClass",
    "TruncationError", "build_exclusion_set", "classify", "count_in_box",
    "exponent_prediction", "find_resonances", "modal_determinant", "normalize",
    "radial_grid", "resolvent_norm",
]
