"""Continuous-variable dispersion: quadrature, Fourier transform, reference densities."""

from .distributions import (
    EntropyRanking,
    ParetoWavefunction,
    PotentialResult,
    entropy_maximizer_check,
    f_distribution,
    f_mean,
    f_sd,
    fdist_potential,
    gaussian,
    laplace,
    laplace_entropy,
    pareto_wavefunction,
    potential_from_wavefunction,
    uniform,
    with_mean_deviation,
)
from .fourier import (
    IntelligentReport,
    SampledWavefunction,
    cauchy_momentum_density,
    dilate,
    fourier,
    from_function,
    gaussian_wavefunction,
    intelligent_product,
    laplace_wavefunction,
    shift,
)
from .quadrature import (
    COMPACT,
    EXPONENTIAL,
    Density1D,
    DispersionSummary,
    SampledDensity,
    Tail,
    dispersion,
    running_moment,
    sampled_dispersion,
)

__all__ = [name for name in dir() if not name.startswith("_")]
