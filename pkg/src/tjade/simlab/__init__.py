"""Source distributions, mixing matrices, simulation studies and limiting variances."""

from .asv import (
    AsymptoticProfile,
    ModeProfile,
    UndefinedVarianceError,
    asv_diag,
    asv_offdiag,
    asv_profile,
    asv_table,
    monte_carlo_variances,
    vector_jade_asv,
)
from .distributions import CATALOG, DistributionSpec, get_spec, sample_source
from .experiment import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    ResultRow,
    run_experiment,
    summarize,
)
from .mixing import haar_orthogonal, mixing_matrices
from .settings import SETTINGS, SettingSpec, draw_sources, get_setting

__all__ = [
    "AsymptoticProfile",
    "ModeProfile",
    "UndefinedVarianceError",
    "asv_diag",
    "asv_offdiag",
    "asv_profile",
    "asv_table",
    "monte_carlo_variances",
    "vector_jade_asv",
    "CATALOG",
    "DistributionSpec",
    "get_spec",
    "sample_source",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "ResultRow",
    "run_experiment",
    "summarize",
    "haar_orthogonal",
    "mixing_matrices",
    "SETTINGS",
    "SettingSpec",
    "draw_sources",
    "get_setting",
]
