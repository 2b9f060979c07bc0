"""Simulation and verification toolkit for self-similar Tweedie/Hougaard families."""
from ._version import __version__
from .family_params import (
    INF_POWER,
    CorrelationSign,
    DomainError,
    HurstProfile,
    Interval,
    PowerFamilySpec,
    alpha_of_p,
    correlation_sign,
    fractal_dimension,
    hurst_domain,
    hurst_of_p,
    hurst_profile,
    mu_domain,
)
from .rng import RandomStream
from .tweedie import ExpVarianceFamily, TweedieDistribution, cumulant_transform, mean_var, tweedie_cumulant
from .samplers import sample_tweedie, sample_positive_stable, sample_tilted_stable, sample_extreme_one_stable
from .levy_paths import PathEnsemble, TimeGrid, extend_two_sided, marginal_ss_check, simulate_hougaard
from .fhm import FHMConfig, fhm_cumulant_transform, fhm_variance, kernel_l2, simulate_fhm
from .stats import StatReport, Tolerances

__all__ = [
    "__version__",
    "INF_POWER",
    "CorrelationSign",
    "DomainError",
    "HurstProfile",
    "Interval",
    "PowerFamilySpec",
    "alpha_of_p",
    "correlation_sign",
    "fractal_dimension",
    "hurst_domain",
    "hurst_of_p",
    "hurst_profile",
    "mu_domain",
    "RandomStream",
    "ExpVarianceFamily",
    "TweedieDistribution",
    "cumulant_transform",
    "mean_var",
    "tweedie_cumulant",
    "sample_tweedie",
    "sample_positive_stable",
    "sample_tilted_stable",
    "sample_extreme_one_stable",
    "PathEnsemble",
    "TimeGrid",
    "extend_two_sided",
    "marginal_ss_check",
    "simulate_hougaard",
    "FHMConfig",
    "fhm_cumulant_transform",
    "fhm_variance",
    "kernel_l2",
    "simulate_fhm",
    "StatReport",
    "Tolerances",
]
