"""Sampled wavefunctions, the position-to-momentum transform and MD/SD products.

The momentum wavefunction is the exact continuous Fourier transform
(hbar = 1) of the piecewise-linear interpolant of the samples:

    psi~(p) = dx/sqrt(2 pi) * sinc^2(p dx / 2) * exp(-i p x0) * DFT(psi)(p)

evaluated on the FFT frequency grid of the zero-padded samples.  The
interpolant converges to ``psi`` at O(dx^2), so only momenta
``|p| <= 0.02/dx`` (where ``p dx`` stays small) are used for moments;
beyond that window the dispersion code extrapolates a fitted power tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import GridTooCoarse, InvalidState
from .quadrature import DispersionSummary, SampledDensity, sampled_dispersion

NORM_TOL = 1e-6
EDGE_TOL = 1e-10
PARSEVAL_WARN = 1e-6
PARSEVAL_FAIL = 1e-4
TRUST_FACTOR = 0.02


@dataclass(frozen=True)
class SampledWavefunction:
    """Samples of a wavefunction on the uniform grid ``x0 + k*step``.

    ``trusted`` optionally limits which half-width around zero is accurate
    enough for moment computations (set on transformed wavefunctions).
    """

    x0: float
    step: float
    values: np.ndarray
    trusted: float | None = None
    parseval_residual: float | None = None

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.step * np.arange(self.count)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.density) * self.step)

    @property
    def norm_residual(self) -> float:
        return abs(self.norm - 1.0)

    def validate(self) -> "SampledWavefunction":
        if self.norm_residual > NORM_TOL:
            raise InvalidState(f"wavefunction norm {self.norm!r} differs from 1 by > {NORM_TOL}")
        dens = self.density
        if max(dens[0], dens[-1]) >= EDGE_TOL:
            raise InvalidState("grid too narrow: boundary density exceeds 1e-10")
        return self

    def window(self, half_width: float | None = None) -> "SampledWavefunction":
        """Restriction to ``|x| <= half_width`` (defaults to ``trusted``)."""
        hw = self.trusted if half_width is None else half_width
        if hw is None:
            return self
        x = self.x
        idx = np.flatnonzero(np.abs(x) <= hw)
        return SampledWavefunction(x0=float(x[idx[0]]), step=self.step, values=self.values[idx])

    def sampled_density(self) -> SampledDensity:
        return SampledDensity(self.x, self.density)


def from_function(func, x_min: float, x_max: float, step: float) -> SampledWavefunction:
    n = int(round((x_max - x_min) / step)) + 1
    x = x_min + step * np.arange(n)
    return SampledWavefunction(x0=x_min, step=step, values=np.asarray(func(x), dtype=complex))


def gaussian_wavefunction(sigma: float = 2**-0.5, step: float = 1e-3, extent: float = 14.0,
                          center: float = 0.0) -> SampledWavefunction:
    """``|psi|^2`` normal with standard deviation ``sigma``; grid ``center +- extent*sigma``."""
    amp = (2 * math.pi * sigma**2) ** -0.25
    lo = center - extent * sigma
    return from_function(lambda x: amp * np.exp(-((x - center) ** 2) / (4 * sigma**2)),
                         lo, center + extent * sigma, step * sigma / 2**-0.5)


def laplace_wavefunction(mu: float = 1.0, step: float | None = None, extent: float = 30.0,
                         center: float = 0.0) -> SampledWavefunction:
    """``psi = (2 mu)^-1/2 exp(-|x|/(2 mu))`` so that ``|psi|^2`` is Laplace with scale ``mu``.

    The grid contains the cusp at ``center`` exactly.
    """
    h = 1e-4 * mu if step is None else step
    half = int(round(extent * mu / h))
    x = center + h * np.arange(-half, half + 1)
    vals = (2 * mu) ** -0.5 * np.exp(-np.abs(x - center) / (2 * mu))
    return SampledWavefunction(x0=float(x[0]), step=h, values=vals.astype(complex))


def dilate(psi: SampledWavefunction, s: float) -> SampledWavefunction:
    """``sqrt(s) psi(s x)`` on the correspondingly scaled grid."""
    return SampledWavefunction(x0=psi.x0 / s, step=psi.step / s, values=math.sqrt(s) * psi.values)


def shift(psi: SampledWavefunction, c: float) -> SampledWavefunction:
    """``psi(x - c)``."""
    return SampledWavefunction(x0=psi.x0 + c, step=psi.step, values=psi.values)


def _fft_length(n: int, pad: int) -> int:
    return 1 << max(16, int(math.ceil(math.log2(pad * n))))


def fourier(psi: SampledWavefunction, pad: int = 4, trust: float = TRUST_FACTOR,
            check: bool = True) -> SampledWavefunction:
    """Momentum wavefunction on the conjugate grid, sorted by momentum.

    ``pad`` sets the zero padding (FFT length ``>= pad * count``) and hence the
    momentum step ``2 pi / (N dx)``.  Raises :class:`GridTooCoarse` when the
    Parseval residual exceeds 1e-4.
    """
    if check:
        psi.validate()
    dx = psi.step
    n = _fft_length(psi.count, pad)
    buf = np.zeros(n, dtype=complex)
    buf[: psi.count] = psi.values
    spec = np.fft.fftshift(np.fft.fft(buf))
    p = np.fft.fftshift(np.fft.fftfreq(n, d=dx)) * 2 * math.pi
    vals = dx / math.sqrt(2 * math.pi) * np.sinc(p * dx / (2 * math.pi)) ** 2 * np.exp(-1j * p * psi.x0) * spec
    dp = 2 * math.pi / (n * dx)
    residual = abs(float(np.sum(np.abs(vals) ** 2) * dp) - psi.norm)
    if check and residual > PARSEVAL_FAIL:
        raise GridTooCoarse(f"Parseval residual {residual!r} exceeds {PARSEVAL_FAIL}")
    return SampledWavefunction(x0=float(p[0]), step=dp, values=vals, trusted=trust / dx,
                               parseval_residual=residual)


@dataclass(frozen=True)
class IntelligentReport:
    md_x: float
    md_p: float
    product: float
    sd_x: float | None
    sd_p: float | None
    sd_product: float | None
    parseval_residual: float

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def intelligent_product(psi: SampledWavefunction, pad: int = 4) -> IntelligentReport:
    """Mean-deviation and standard-deviation products in position and momentum."""
    pos: DispersionSummary = sampled_dispersion(psi.validate().sampled_density())
    phi = fourier(psi, pad=pad)
    mom = sampled_dispersion(phi.window().sampled_density())
    sd_prod = pos.sd * mom.sd if pos.sd is not None and mom.sd is not None else None
    return IntelligentReport(
        md_x=pos.md,
        md_p=mom.md,
        product=pos.md * mom.md,
        sd_x=pos.sd,
        sd_p=mom.sd,
        sd_product=sd_prod,
        parseval_residual=phi.parseval_residual,
    )


def cauchy_momentum_density(p, mu: float):
    """``|psi~(p)|^2`` for the Laplace-amplitude wavefunction of scale ``mu``."""
    p = np.asarray(p, dtype=float)
    return (2 * math.sqrt(mu) / (math.sqrt(math.pi) * (1 + 4 * mu**2 * p**2))) ** 2
