import math
import threading

import numpy as np
import pytest
from scipy import integrate, stats

from devur.contwave import (
    COMPACT,
    Density1D,
    DispersionSummary,
    Tail,
    cauchy_momentum_density,
    dilate,
    dispersion,
    entropy_maximizer_check,
    f_distribution,
    f_mean,
    f_sd,
    fdist_potential,
    fourier,
    from_function,
    gaussian,
    gaussian_wavefunction,
    intelligent_product,
    laplace,
    laplace_entropy,
    laplace_wavefunction,
    pareto_wavefunction,
    potential_from_wavefunction,
    running_moment,
    shift,
    uniform,
    with_mean_deviation,
)
from devur.errors import Cancelled, ConstraintViolated, GridTooCoarse, InvalidState, ParamOutOfRange


def test_reference_moments():
    s = dispersion(laplace(1.3))
    assert abs(s.md - 1.3) < 1e-9 and abs(s.sd - 1.3 * math.sqrt(2)) < 1e-9
    assert abs(s.diff_entropy - laplace_entropy(1.3)) < 1e-9
    g = dispersion(gaussian(0.7, loc=2.0))
    assert abs(g.mean - 2.0) < 1e-9 and abs(g.sd - 0.7) < 1e-9
    assert abs(g.md - 0.7 * math.sqrt(2 / math.pi)) < 1e-9
    u = dispersion(uniform(1.5))
    assert abs(u.md - 0.75) < 1e-9 and abs(u.diff_entropy - math.log(3)) < 1e-9


@pytest.mark.parametrize("d1", [1, 2])
@pytest.mark.parametrize("d2", range(1, 9))
def test_fdist_existence_regimes(d1, d2):
    s = dispersion(f_distribution(d1, d2))
    assert abs(s.norm - 1) < 1e-8
    assert (s.mean is not None) == (d2 > 2)
    assert (s.sd is not None) == (d2 > 4)
    if s.mean is not None:
        assert abs(s.mean - f_mean(d2)) < 1e-6 * f_mean(d2)
        assert abs(s.md - stats.f(d1, d2).expect(lambda x: abs(x - f_mean(d2)))) < 1e-5
    if s.sd is not None:
        assert abs(s.sd - f_sd(d1, d2)) < 1e-6 * f_sd(d1, d2)


def test_fdist_pdf_matches_scipy():
    for d1, d2 in [(1, 1), (2, 5), (1, 8)]:
        dens = f_distribution(d1, d2)
        for x in (0.01, 0.5, 3.0, 100.0):
            assert abs(dens.pdf(x) - stats.f.pdf(x, d1, d2)) < 1e-12 * max(1, stats.f.pdf(x, d1, d2))


def test_running_moment_growth_for_divergent_sd():
    cut = [1e2, 1e3, 1e4, 1e5]
    second = running_moment(f_distribution(1, 3), 2, cut, center=3.0)
    ratios = np.array(second[1:]) / np.array(second[:-1])
    # tail x^-5/2 makes the truncated second moment grow like R^(1/2)
    assert np.all(np.diff(ratios) < 0) and abs(ratios[-1] / math.sqrt(10) - 1) < 0.05
    first = running_moment(f_distribution(1, 3), 1, cut, center=3.0)
    inc = np.abs(np.diff(first))
    assert np.all(inc[1:] < inc[:-1] * 0.5)


def test_sampled_dispersion_grid_doubling():
    from devur.contwave import SampledDensity, sampled_dispersion

    out = []
    for h in (2e-3, 1e-3):
        x = np.arange(-30, 30 + h / 2, h)
        out.append(sampled_dispersion(SampledDensity(x, np.exp(-np.abs(x)) / 2)))
    for k in ("md", "sd", "diff_entropy"):
        a, b = getattr(out[0], k), getattr(out[1], k)
        assert abs(a - b) < 1e-6 * abs(b)


def test_parseval_laplace():
    phi = fourier(laplace_wavefunction(0.5))
    assert phi.parseval_residual < 1e-6


def test_unknown_tail_uses_cauchy_test():
    lap = laplace(1.0)
    unknown = Density1D(pdf=lap.pdf, tails=(Tail("unknown"), Tail("unknown")), name="lap?")
    s = dispersion(unknown)
    assert abs(s.sd - math.sqrt(2)) < 1e-8
    cauchy = Density1D(pdf=lambda x: 1 / (math.pi * (1 + x * x)), tails=(Tail("unknown"),) * 2)
    s = dispersion(cauchy)
    assert s.mean is None and "mean" in s.divergent


def test_power_tail_classification():
    assert Tail.power(3).moment_finite(1) is True
    assert Tail.power(3).moment_finite(2) is False
    assert Tail("unknown").moment_finite(1) is None
    with pytest.raises(ValueError):
        Tail.power(1.0)


def test_dispersion_cancel():
    ev = threading.Event()
    ev.set()
    with pytest.raises(Cancelled):
        dispersion(laplace(1.0), cancel=ev)


def test_summary_json_round_trip():
    s = dispersion(f_distribution(1, 3))
    assert DispersionSummary.from_json(s.to_json()) == s


def test_entropy_maximizer():
    r = entropy_maximizer_check(1.0, [with_mean_deviation(k, 1.0) for k in ("laplace", "gaussian", "uniform")])
    assert r.winner == "laplace" and r.margin() > 1e-3
    assert abs(dict(r.entries)["laplace"] - (1 + math.log(2))) < 1e-9
    with pytest.raises(ConstraintViolated):
        entropy_maximizer_check(1.0, [laplace(2.0)])
    with pytest.raises(ConstraintViolated):
        entropy_maximizer_check(1.0, [laplace(1.0, loc=0.5)])


def test_gaussian_intelligent_product():
    r = intelligent_product(gaussian_wavefunction())
    assert abs(r.product - 1 / math.pi) < 1e-4
    assert abs(r.sd_product - 0.5) < 1e-6
    assert r.parseval_residual < 1e-6


def test_fourier_of_laplace_is_lorentzian():
    phi = fourier(laplace_wavefunction(1.0))
    w = phi.window()
    ref = cauchy_momentum_density(w.x, 1.0)
    assert np.max(np.abs(w.density - ref)) < 1e-5


def test_scale_law_and_shift_invariance():
    base = intelligent_product(gaussian_wavefunction())
    wide = intelligent_product(dilate(gaussian_wavefunction(), 0.5))
    assert abs(wide.md_x - 2 * base.md_x) < 1e-6 and abs(wide.md_p - base.md_p / 2) < 1e-6
    moved = intelligent_product(shift(gaussian_wavefunction(), 3.0))
    assert abs(moved.product - base.product) < 1e-7


def test_wavefunction_validation():
    narrow = from_function(lambda x: (2 * math.pi * 0.5) ** -0.25 * np.exp(-x * x / 2), -2, 2, 1e-3)
    with pytest.raises(InvalidState):
        narrow.validate()
    bad_norm = from_function(lambda x: np.exp(-x * x), -10, 10, 1e-3)
    with pytest.raises(InvalidState):
        bad_norm.validate()


def test_coarse_grid_flags_parseval():
    coarse = gaussian_wavefunction(sigma=0.05, step=0.5, extent=400)
    with pytest.raises((GridTooCoarse, InvalidState)):
        fourier(coarse)


def test_gaussian_potential_is_harmonic():
    psi = gaussian_wavefunction(step=1e-3, extent=10)
    pot = potential_from_wavefunction(psi, energy_offset=0.5)
    ok = np.isfinite(pot.V) & (np.abs(pot.x) < 4)
    assert np.max(np.abs(pot.V[ok] - pot.x[ok] ** 2 / 2)) < 1e-4
    assert pot.masked >= 2


def test_fdist_potential_symbolic_oracle():
    sp = pytest.importorskip("sympy")
    x = sp.symbols("x", positive=True)
    for d1, d2 in [(1, 5), (3, 7), (2, 4)]:
        f = x ** sp.Rational(d1 - 2, 2) * (1 + sp.Rational(d1, d2) * x) ** sp.Rational(-(d1 + d2), 2)
        psi = sp.sqrt(f)
        v = sp.lambdify(x, sp.simplify(sp.diff(psi, x, 2) / (2 * psi)))
        for xv in (0.2, 1.0, 7.5):
            assert abs(fdist_potential(xv, d1, d2) - v(xv)) < 1e-12 * max(1, abs(v(xv)))


def test_fdist_reconstruction_matches_correct_formula():
    dens = f_distribution(1, 5)
    psi = from_function(lambda x: np.sqrt([dens.pdf(v) for v in x]), 0.1, 20.0, 1e-3)
    pot = potential_from_wavefunction(psi)
    ok = np.isfinite(pot.V)
    exact = fdist_potential(pot.x[ok], 1, 5)
    assert np.max(np.abs(pot.V[ok] - exact) / np.abs(exact)) < 1e-3


@pytest.mark.parametrize("alpha_p", [1.5, 3.0])
def test_pareto_patch(alpha_p):
    pw = pareto_wavefunction(alpha_p, lam=1.0, mass_p=0.5)
    cv, cd = pw.continuity()
    assert cv < 1e-10 and cd < 1e-10
    below, _ = integrate.quad(lambda t: float(pw.patch(t)) ** 2, -np.inf, 1.0)
    assert abs(below - 0.5) < 1e-10
    s = dispersion(pw.density())
    assert abs(s.norm - 1) < 1e-8
    assert s.md is not None
    assert (s.sd is None) == (alpha_p <= 2)


def test_pareto_validation():
    with pytest.raises(ParamOutOfRange):
        pareto_wavefunction(1.0, 1.0, 0.5)
    with pytest.raises(ParamOutOfRange):
        pareto_wavefunction(2.0, 1.0, 1.0)


def test_compact_constant():
    assert COMPACT.moment_finite(5)
