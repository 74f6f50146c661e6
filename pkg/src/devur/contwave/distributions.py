"""Reference densities, the entropy-maximiser check, potentials and the Pareto wavefunction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from ..errors import ConstraintViolated, PatchInfeasible, ParamOutOfRange
from .fourier import SampledWavefunction
from .quadrature import COMPACT, EXPONENTIAL, Density1D, Tail, dispersion

CONSTRAINT_TOL = 1e-6
MASK_TOL = 1e-8


def laplace(mu: float, loc: float = 0.0) -> Density1D:
    """``exp(-|x - loc|/mu) / (2 mu)``; mean deviation ``mu``."""
    if mu <= 0:
        raise ParamOutOfRange("mu must be positive")
    return Density1D(
        pdf=lambda x: math.exp(-abs(x - loc) / mu) / (2 * mu),
        center=loc,
        scale=mu,
        breakpoints=(loc,),
        name="laplace",
    )


def gaussian(sigma: float, loc: float = 0.0) -> Density1D:
    if sigma <= 0:
        raise ParamOutOfRange("sigma must be positive")
    norm = 1.0 / (sigma * math.sqrt(2 * math.pi))
    return Density1D(
        pdf=lambda x: norm * math.exp(-0.5 * ((x - loc) / sigma) ** 2),
        center=loc,
        scale=sigma,
        name="gaussian",
    )


def uniform(half_width: float, loc: float = 0.0) -> Density1D:
    if half_width <= 0:
        raise ParamOutOfRange("half_width must be positive")
    h = 1.0 / (2 * half_width)
    return Density1D(
        pdf=lambda x: h if abs(x - loc) <= half_width else 0.0,
        support=(loc - half_width, loc + half_width),
        tails=(COMPACT, COMPACT),
        center=loc,
        scale=half_width,
        name="uniform",
    )


def with_mean_deviation(kind: str, md: float) -> Density1D:
    """Zero-mean member of a family rescaled to mean deviation ``md``."""
    if kind == "laplace":
        return laplace(md)
    if kind == "gaussian":
        return gaussian(md * math.sqrt(math.pi / 2))
    if kind == "uniform":
        return uniform(2 * md)
    raise ValueError(f"unknown family {kind!r}")


def laplace_entropy(mu: float) -> float:
    return 1 + math.log(2 * mu)


@dataclass(frozen=True)
class EntropyRanking:
    entries: tuple[tuple[str, float], ...]  # (name, differential entropy), descending

    @property
    def winner(self) -> str:
        return self.entries[0][0]

    def margin(self) -> float:
        """Entropy gap between the first and second entries (inf for one entry)."""
        return self.entries[0][1] - self.entries[1][1] if len(self.entries) > 1 else math.inf


def entropy_maximizer_check(md_target: float, candidates: Sequence[Density1D]) -> EntropyRanking:
    """Rank zero-mean candidates with mean deviation ``md_target`` by differential entropy."""
    rows = []
    for i, cand in enumerate(candidates):
        s = dispersion(cand)
        name = cand.name or f"candidate{i}"
        if s.mean is None or abs(s.mean) > CONSTRAINT_TOL:
            raise ConstraintViolated(f"{name}: mean {s.mean!r} is not 0")
        if s.md is None or abs(s.md - md_target) > CONSTRAINT_TOL:
            raise ConstraintViolated(f"{name}: mean deviation {s.md!r} != {md_target}")
        rows.append((name, float(s.diff_entropy)))
    rows.sort(key=lambda r: -r[1])
    return EntropyRanking(tuple(rows))


# --- F-distribution ---------------------------------------------------------


def f_distribution(d1: int, d2: int) -> Density1D:
    """F-distribution density with the beta-function normaliser; right tail ``x^-(d2/2 + 1)``."""
    if d1 < 1 or d2 < 1:
        raise ParamOutOfRange("d1 and d2 must be >= 1")
    d1, d2 = float(d1), float(d2)
    r = d1 / d2
    log_norm = -special.betaln(d1 / 2, d2 / 2) + (d1 / 2) * math.log(r)

    def pdf(x):
        if x <= 0:
            return 0.0
        return math.exp(log_norm + (d1 / 2 - 1) * math.log(x) - (d1 + d2) / 2 * math.log1p(r * x))

    mode = max((d1 - 2) / d1 * d2 / (d2 + 2), 0.0)
    return Density1D(
        pdf=pdf,
        support=(0.0, math.inf),
        tails=(COMPACT, Tail.power(d2 / 2 + 1)),
        center=0.0,
        scale=1.0,
        breakpoints=(mode,) if mode > 0 else (),
        name=f"F({int(d1)},{int(d2)})",
    )


def f_mean(d2: float) -> float | None:
    return d2 / (d2 - 2) if d2 > 2 else None


def f_sd(d1: float, d2: float) -> float | None:
    if d2 <= 4:
        return None
    return math.sqrt(2 * d2**2 * (d1 + d2 - 2) / (d1 * (d2 - 2) ** 2 * (d2 - 4)))


def fdist_wavefunction(d1: int, d2: int):
    """``psi = sqrt(f)`` as a callable."""
    dens = f_distribution(d1, d2)
    return lambda x: math.sqrt(dens.pdf(x))


def fdist_potential(x, d1: float, d2: float, energy_offset: float = 0.0):
    """Potential (hbar = m = 1) for which ``sqrt(f)`` is a zero-energy-shifted eigenfunction.

    With ``psi = K x^k (1 + r x)^-q``, ``k = (d1 - 2)/4``, ``q = (d1 + d2)/4``
    and ``r = d1/d2``, ``V = V0 + psi''/(2 psi)``.
    """
    x = np.asarray(x, dtype=float)
    k = (d1 - 2) / 4
    q = (d1 + d2) / 4
    r = d1 / d2
    u = 1 + r * x
    return energy_offset + 0.5 * (
        (k * k - k) / x**2 - 2 * k * q * r / (x * u) + (q * q + q) * r * r / u**2
    )


# --- potential reconstruction ----------------------------------------------


@dataclass(frozen=True)
class PotentialResult:
    x: np.ndarray
    V: np.ndarray  # NaN where masked
    masked: int

    def rows(self):
        return zip(self.x, self.V)


def potential_from_wavefunction(psi: SampledWavefunction, energy_offset: float = 0.0) -> PotentialResult:
    """``V = E + psi''/(2 psi)`` by second-order centred differences on interior points.

    Points with ``|psi| < 1e-8`` and the two grid ends are masked (NaN).
    """
    vals = np.asarray(psi.values)
    if np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals.real))):
        raise ParamOutOfRange("potential reconstruction needs a real wavefunction")
    v = vals.real
    h = psi.step
    second = np.full_like(v, np.nan)
    second[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / (h * h)
    mask = ~np.isfinite(second) | (np.abs(v) < MASK_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        V = np.where(mask, np.nan, energy_offset + second / (2 * v))
    return PotentialResult(x=psi.x, V=V, masked=int(mask.sum()))


# --- Pareto wavefunction ----------------------------------------------------


@dataclass(frozen=True)
class ParetoWavefunction:
    """``psi = f`` on ``[lambda, inf)`` (Pareto tail of mass ``p``) and a Gaussian patch below.

    ``f(x) = sqrt(p alpha lambda^alpha / x^(alpha+1))`` and
    ``phi(x) = c exp(-(x - x0)^2 / w)`` with ``phi(lambda) = f(lambda)``,
    ``phi'(lambda) = f'(lambda)`` and ``int_{-inf}^lambda phi^2 = 1 - p``.
    """

    alpha_p: float
    lam: float
    mass_p: float
    c: float
    x0: float
    w: float
    residuals: tuple[float, float, float]
    iterations: int

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(self.mass_p * self.alpha_p * self.lam**self.alpha_p / x ** (self.alpha_p + 1))

    def patch(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * np.exp(-((x - self.x0) ** 2) / self.w)

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.lam, self.tail(np.maximum(x, self.lam)), self.patch(x))

    def density(self) -> Density1D:
        def pdf(x):
            if x >= self.lam:
                return self.mass_p * self.alpha_p * self.lam**self.alpha_p / x ** (self.alpha_p + 1)
            return self.c**2 * math.exp(-2 * (x - self.x0) ** 2 / self.w)

        return Density1D(
            pdf=pdf,
            tails=(EXPONENTIAL, Tail.power(self.alpha_p + 1)),
            center=self.lam,
            scale=max(self.lam, math.sqrt(self.w)),
            breakpoints=(self.x0,),
            name=f"pareto(alpha={self.alpha_p})",
        )

    def sample(self, x_min: float, x_max: float, step: float) -> SampledWavefunction:
        n = int(round((x_max - x_min) / step)) + 1
        x = x_min + step * np.arange(n)
        return SampledWavefunction(x0=x_min, step=step, values=self.psi(x).astype(complex))

    def continuity(self) -> tuple[float, float]:
        """``|phi(lam) - f(lam)|`` and ``|phi'(lam) - f'(lam)|``."""
        return abs(self.residuals[0]), abs(self.residuals[1])


def _patch_residuals(params, a, lam, p):
    logc, x0, logw = params
    c, w = math.exp(logc), math.exp(logw)
    f_l = math.sqrt(p * a / lam)
    df_l = -f_l * (a + 1) / (2 * lam)
    phi_l = c * math.exp(-((lam - x0) ** 2) / w)
    dphi_l = -2 * (lam - x0) / w * phi_l
    mass = c * c * math.sqrt(math.pi * w / 2) * special.ndtr((lam - x0) / math.sqrt(w / 4))
    return np.array([phi_l - f_l, dphi_l - df_l, mass - (1 - p)])


def _scaled_residuals(params, a, lam, p):
    r = _patch_residuals(params, a, lam, p)
    f_l = math.sqrt(p * a / lam)
    return r / np.array([f_l, f_l * (a + 1) / (2 * lam), 1 - p])


def _initial_guess(a, lam, p):
    """Reduce the constraints to one monotone equation in ``w`` and bracket its root."""
    f_l = math.sqrt(p * a / lam)
    k = (a + 1) / (4 * lam)

    def g(logw):
        w = math.exp(logw)
        d = w * k
        return (
            math.log(f_l * f_l)
            + 2 * d * d / w
            + 0.5 * math.log(math.pi * w / 2)
            + special.log_ndtr(2 * d / math.sqrt(w))
            - math.log(1 - p)
        )

    grid = np.linspace(-40, 40, 161)
    vals = [g(t) for t in grid]
    for i in range(len(grid) - 1):
        if vals[i] <= 0 <= vals[i + 1]:
            logw = grid[i] + (grid[i + 1] - grid[i]) * vals[i] / (vals[i] - vals[i + 1])
            break
    else:
        logw = 0.0
    w = math.exp(logw)
    x0 = lam - w * k
    c = f_l * math.exp((lam - x0) ** 2 / w)
    return np.array([math.log(c), x0, logw])


def pareto_wavefunction(alpha_p: float, lam: float, mass_p: float,
                        max_iter: int = 100, tol: float = 1e-14) -> ParetoWavefunction:
    """Solve the three patch constraints for ``(c, x0, w)`` by damped Newton iteration."""
    a, lam, p = float(alpha_p), float(lam), float(mass_p)
    if not a > 1:
        raise ParamOutOfRange("alpha_p must exceed 1")
    if not lam > 0:
        raise ParamOutOfRange("lambda must be positive")
    if not 0 < p < 1:
        raise ParamOutOfRange("mass_p must lie in (0, 1)")
    x = _initial_guess(a, lam, p)
    r = _scaled_residuals(x, a, lam, p)
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(r)) < tol:
            break
        jac = np.empty((3, 3))
        for j in range(3):
            h = 1e-7 * max(1.0, abs(x[j]))
            e = np.zeros(3)
            e[j] = h
            jac[:, j] = (_scaled_residuals(x + e, a, lam, p) - _scaled_residuals(x - e, a, lam, p)) / (2 * h)
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise PatchInfeasible(f"singular Jacobian at iteration {it}") from exc
        step, base = 1.0, np.linalg.norm(r)
        while step > 1e-10:
            trial = x + step * dx
            try:
                rt = _scaled_residuals(trial, a, lam, p)
            except (OverflowError, ValueError):
                rt = None
            if rt is not None and np.all(np.isfinite(rt)) and np.linalg.norm(rt) < base:
                break
            step *= 0.5
        else:
            break
        x, r = trial, rt
    if not np.max(np.abs(r)) < 1e-10:
        raise PatchInfeasible(f"patch constraints not met (scaled residual {np.max(np.abs(r))!r})")
    res = _patch_residuals(x, a, lam, p)
    return ParetoWavefunction(
        alpha_p=a,
        lam=lam,
        mass_p=p,
        c=math.exp(x[0]),
        x0=float(x[1]),
        w=math.exp(x[2]),
        residuals=tuple(float(v) for v in res),
        iterations=it,
    )
