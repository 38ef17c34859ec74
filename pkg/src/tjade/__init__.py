"""Independent component analysis for tensor-valued observations."""

from .ica import (
    UnmixingModel,
    fobi_fit,
    inverse_transform,
    jade_fit,
    lowest_kurtosis_components,
    tfobi_fit,
    tjade_fit,
    transform,
    vfobi_fit,
    vjade_fit,
)
from .metrics import kronecker_gain, mdi, transformed_mdi

__all__ = [
    "UnmixingModel",
    "tjade_fit",
    "tfobi_fit",
    "jade_fit",
    "fobi_fit",
    "vjade_fit",
    "vfobi_fit",
    "transform",
    "inverse_transform",
    "lowest_kurtosis_components",
    "kronecker_gain",
    "mdi",
    "transformed_mdi",
]
