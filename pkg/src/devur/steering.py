"""EPR-violation test for a lossy two-site Werner experiment.

Each site is a qutrit spanned by ``|+1>, |-1>`` (one particle in either
mode) and ``|0>`` (particle lost).  Joint index of ``|a>|b>`` is ``3a + b``.
Lossy detection of the Werner state ``p|S><S| + (1-p) I/4`` gives the block
state ``rho_F``: ``eta^2 rho_W`` on the two-particle sector,
``eta(1-eta)/2`` on the four one-particle states and ``(1-eta)^2`` on the
double vacuum.

Inferred deviations condition site A on the outcome of the matching spin
component at site B (outcomes ``+1/2, -1/2`` and the no-particle result).
The deviation of ``J_i^A`` in each conditional state is taken over the
detected outcomes: lost-particle events carry zero deviation weight, while
the mean ``<J_i^A>`` is the full conditional expectation (vacuum counts as
0).  This is what makes the local bound ``3<N>/2 - <N>^2/2`` tight and
reproduces ``(eta/2)(1 - eta^2 p^2)`` per axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .deviation import check_alpha, outcome_distribution
from .errors import ParamOutOfRange, SeriesNotConverged
from .numkit import Observable, expval, kron, partial_trace, State

AXES = ("x", "y", "z")
# Joint indices of the two-particle sector, in the order (++, +-, -+, --).
PARTICLE_PAIRS = (0, 1, 3, 4)
ONE_PARTICLE = (2, 5, 6, 7)
DOUBLE_VACUUM = 8

VIOLATION_MARGIN = 1e-12
BISECT_TOL = 1e-9
SERIES_CAP = 200
SERIES_RTOL = 1e-14


def _site_operators() -> dict[str, np.ndarray]:
    jx = np.zeros((3, 3), dtype=complex)
    jx[0, 1] = jx[1, 0] = 0.5
    jy = np.zeros((3, 3), dtype=complex)
    jy[0, 1], jy[1, 0] = -0.5j, 0.5j
    jz = np.diag([0.5, -0.5, 0.0]).astype(complex)
    n = np.diag([1.0, 1.0, 0.0]).astype(complex)
    return {"x": jx, "y": jy, "z": jz, "N": n}


@dataclass(frozen=True)
class SiteOperators:
    """Truncated Schwinger operators on one qutrit site and their embeddings."""

    Jx: np.ndarray
    Jy: np.ndarray
    Jz: np.ndarray
    N: np.ndarray

    def J(self, axis: str) -> np.ndarray:
        return {"x": self.Jx, "y": self.Jy, "z": self.Jz}[axis]

    @staticmethod
    def embed(op: np.ndarray, site: str) -> np.ndarray:
        eye = np.eye(3, dtype=complex)
        return kron(op, eye) if site == "A" else kron(eye, op)


def site_operators() -> SiteOperators:
    ops = _site_operators()
    return SiteOperators(Jx=ops["x"], Jy=ops["y"], Jz=ops["z"], N=ops["N"])


@lru_cache(maxsize=None)
def _spin_observable(axis: str) -> Observable:
    return Observable(_site_operators()[axis], label=f"J{axis}")


def singlet() -> np.ndarray:
    """``(|+,-> - |-,+>)/sqrt(2)`` in the 4-dim two-particle basis."""
    s = np.zeros(4, dtype=complex)
    s[1], s[2] = 2 ** -0.5, -(2 ** -0.5)
    return s


def werner(p: float) -> np.ndarray:
    s = singlet()
    return p * np.outer(s, s.conj()) + (1 - p) / 4 * np.eye(4)


@dataclass(frozen=True)
class LossyWernerModel:
    p: float
    eta: float
    rho_F: np.ndarray = field(repr=False)

    @property
    def state(self) -> State:
        return State.mixed(self.rho_F)


def build_model(p: float, eta: float) -> LossyWernerModel:
    p, eta = float(p), float(eta)
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRange(f"p must lie in [0, 1], got {p}")
    if not 0.0 < eta <= 1.0:
        raise ParamOutOfRange(f"eta must lie in (0, 1], got {eta}")
    rho = np.zeros((9, 9), dtype=complex)
    idx = np.array(PARTICLE_PAIRS)
    rho[np.ix_(idx, idx)] = eta**2 * werner(p)
    for k in ONE_PARTICLE:
        rho[k, k] = eta * (1 - eta) / 2
    rho[DOUBLE_VACUUM, DOUBLE_VACUUM] = (1 - eta) ** 2
    return LossyWernerModel(p=p, eta=eta, rho_F=rho)


def _check_axis(axis: str) -> str:
    if axis not in AXES:
        raise ParamOutOfRange(f"axis must be one of {AXES}, got {axis!r}")
    return axis


def detected_deviation(rho_a: np.ndarray, axis: str, alpha: float) -> float:
    """Alpha-deviation of ``J_axis`` on a site state, summed over detected outcomes."""
    obs = _spin_observable(axis)
    values, probs, mean = outcome_distribution(obs, State.mixed(rho_a, tol=1e-9))
    spec = obs.spectrum
    detected = np.array([abs(basis[2, :]).max() < 0.5 for basis in spec.class_bases])
    return float(np.sum(probs[detected] * np.abs(values[detected] - mean) ** alpha))


def full_deviation(rho_a: np.ndarray, axis: str, alpha: float) -> float:
    """Alpha-deviation of ``J_axis`` over all three qutrit outcomes."""
    values, probs, mean = outcome_distribution(_spin_observable(axis), State.mixed(rho_a, tol=1e-9))
    return float(probs @ np.abs(values - mean) ** alpha)


def conditional_states(model: LossyWernerModel, axis: str):
    """Yield ``(P(b), rho_{A|b})`` over the eigenprojectors of ``J_axis^B``.

    Zero-probability outcomes are skipped.
    """
    obs = _spin_observable(_check_axis(axis))
    for basis in obs.spectrum.class_bases:
        proj_b = SiteOperators.embed(basis @ basis.conj().T, "B")
        m = proj_b @ model.rho_F @ proj_b
        pb = float(np.trace(m).real)
        if pb <= 1e-300:
            continue
        yield pb, partial_trace(m / pb, (3, 3), keep="A")


def inferred_deviation(
    model: LossyWernerModel, axis: str, alpha: float = 1.0, sector: str = "detected"
) -> float:
    """``sum_b P(b) D^alpha(J_axis^A | b)`` computed from partial traces of ``rho_F``.

    ``sector="full"`` weights the vacuum outcome like any other eigenvalue,
    which for ``alpha = 2`` gives the ordinary conditional variance.
    """
    alpha = check_alpha(alpha)
    dev = {"detected": detected_deviation, "full": full_deviation}[sector]
    return float(sum(pb * dev(rho_a, axis, alpha) for pb, rho_a in conditional_states(model, axis)))


def mean_number(model: LossyWernerModel) -> float:
    return expval(SiteOperators.embed(site_operators().N, "A"), model.state)


def local_md_bound(n: float) -> float:
    """``3n/2 - n^2/2``: minimum of the summed detected MD over local states with ``<N> = n``."""
    return 1.5 * n - 0.5 * n * n


def local_alpha_bound(n: float, alpha: float) -> float:
    """Closed form of the local alpha-deviation bound, ``(n(1-n)^alpha + 2n) / 2^alpha``.

    Attained by a state fully polarised along one axis; for ``alpha <= 1``
    this is the function whose binomial expansion is :func:`alpha_bound`.
    """
    return (n * max(1 - n, 0.0) ** alpha + 2 * n) / 2**alpha


def axis_deviation(n: float, x: float, alpha: float) -> float:
    """Detected alpha-deviation of one axis for a site with ``<N> = n`` and ``2<J> = x``."""
    return ((n + x) / 2 * max(1 - x, 0.0) ** alpha + (n - x) / 2 * (1 + x) ** alpha) / 2**alpha


def _binomial_odd(alpha: float, m: int) -> float:
    # alpha (alpha-1) ... (alpha-2m+2) / (2m-1)!, accumulated in log-magnitude+sign form
    log_mag, sign = 0.0, 1.0
    for k in range(2 * m - 1):
        f = (alpha - k) / (k + 1)
        if f == 0.0:
            return 0.0
        sign *= math.copysign(1.0, f)
        log_mag += math.log(abs(f))
    return sign * math.exp(log_mag)


@dataclass(frozen=True)
class SeriesValue:
    value: float
    terms: int
    truncation_error: float


def _series(eta: float, alpha: float, weight, terms: int | None, coefficients: str) -> SeriesValue:
    """Shared evaluator: ``3 eta/2^alpha + sum_m w_m c_m eta^{2m} [bracket_m] / 2^alpha``."""
    alpha = check_alpha(alpha)
    if coefficients == "corrected":
        coeff = lambda m: _binomial_odd(alpha, m)  # noqa: E731
        bracket = lambda m: eta * (alpha - 2 * m + 1) / (2 * m) - 1  # noqa: E731
    elif coefficients == "literal":
        # Product alpha(alpha-1)...(alpha-2m-2) over (2m-1)!, bracket with (alpha-2m-1).
        def coeff(m):
            prod = 1.0
            for k in range(2 * m + 3):
                prod *= alpha - k
            return prod / math.factorial(2 * m - 1)

        bracket = lambda m: eta * (alpha - 2 * m - 1) / (2 * m) - 1  # noqa: E731
    else:
        raise ValueError("coefficients must be 'corrected' or 'literal'")

    def term(m):
        return weight(m) * coeff(m) * eta ** (2 * m) * bracket(m) / 2**alpha

    head = 3 * eta / 2**alpha
    total = head
    cap = SERIES_CAP if terms is None else int(terms)
    if cap < 1:
        raise ValueError("terms must be >= 1")
    prev = None
    used = 0
    for m in range(1, cap + 1):
        t = term(m)
        total += t
        used = m
        if terms is None and abs(t) <= SERIES_RTOL * abs(total):
            break
        if prev is not None and prev != 0.0 and abs(t) > abs(prev) * (1 + 1e-12) and m > 2:
            raise SeriesNotConverged(f"series terms grow at m={m}: |{t}| > |{prev}|")
        prev = t
    else:
        if terms is None and abs(term(cap + 1)) > 1e-10 * max(1.0, abs(total)):
            raise SeriesNotConverged(f"series not converged within {cap} terms")
    return SeriesValue(value=total, terms=used, truncation_error=abs(term(used + 1)))


def alpha_bound(
    eta: float, alpha: float, terms: int | None = None, coefficients: str = "corrected"
) -> SeriesValue:
    """Series form of the local bound on ``sum_i D^alpha(J_i)`` for ``<N> = eta``.

    ``terms=None`` sums until the relative term size drops below 1e-14 (at
    most 200 terms).  ``coefficients="literal"`` keeps the alternative coefficient string
    ``alpha(alpha-1)...(alpha-2m-2)/(2m-1)!`` for comparison; the default uses
    the binomial coefficients obtained by expanding the closed form.
    """
    return _series(float(eta), alpha, lambda m: 1.0, terms, coefficients)


def inferred_series(
    eta: float, p: float, alpha: float, terms: int | None = None, coefficients: str = "corrected"
) -> SeriesValue:
    """Series for the summed inferred alpha-deviations of the lossy Werner state."""
    p = float(p)
    return _series(float(eta), alpha, lambda m: 3 * eta * p ** (2 * m), terms, coefficients)


def inferred_closed_form(eta: float, p: float, alpha: float) -> float:
    """Summed inferred detected alpha-deviation, ``3[eta D(eta, eta p) + (1-eta) eta/2^alpha]``."""
    return 3 * (eta * axis_deviation(eta, eta * p, alpha) + (1 - eta) * eta / 2**alpha)


@dataclass(frozen=True)
class InferredReport:
    p: float
    eta: float
    alpha: float
    deviations: dict
    lhs: float
    rhs: float
    mean_number: float
    violated: bool
    bound: str
    proof_regime: bool = True

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "eta": self.eta,
            "alpha": self.alpha,
            "deviations": dict(self.deviations),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "mean_number": self.mean_number,
            "violated": self.violated,
            "bound": self.bound,
            "proof_regime": self.proof_regime,
        }

    @classmethod
    def from_json(cls, d: dict) -> "InferredReport":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def check_epr_violation(
    model: LossyWernerModel, alpha: float = 1.0, sd_bound: str = "reference"
) -> InferredReport:
    """Compare summed inferred deviations with the local bound at ``<N^A>``.

    ``alpha = 1``: detected MD against ``3n/2 - n^2/2``.
    ``alpha = 2``: ordinary conditional variances (all three outcomes)
    against ``n/2`` (``sd_bound="reference"``, the standard variance
    criterion for lossy spin measurements) or against the tight
    ``(3n - n^2)/4`` (``sd_bound="tight"``).
    Other ``alpha``: detected alpha-deviations against
    :func:`local_alpha_bound`; ``alpha > 1`` is flagged outside the proof
    regime.
    """
    alpha = check_alpha(alpha)
    n = mean_number(model)
    if alpha == 2.0:
        devs = {ax: inferred_deviation(model, ax, 2.0, sector="full") for ax in AXES}
        if sd_bound == "reference":
            rhs, bound = n / 2, "variance-reference"
        elif sd_bound == "tight":
            rhs, bound = (3 * n - n * n) / 4, "variance-tight"
        else:
            raise ValueError("sd_bound must be 'reference' or 'tight'")
        regime = True
    else:
        devs = {ax: inferred_deviation(model, ax, alpha) for ax in AXES}
        if alpha == 1.0:
            rhs, bound = local_md_bound(n), "md"
        else:
            rhs, bound = local_alpha_bound(n, alpha), "alpha"
        regime = alpha <= 1.0
    lhs = float(sum(devs.values()))
    return InferredReport(
        p=model.p,
        eta=model.eta,
        alpha=alpha,
        deviations=devs,
        lhs=lhs,
        rhs=float(rhs),
        mean_number=n,
        violated=lhs < rhs - VIOLATION_MARGIN,
        bound=bound,
        proof_regime=regime,
    )


def _bisect(pred, lo: float, hi: float, tol: float) -> float:
    """Smallest parameter in ``(lo, hi]`` with ``pred`` true, assuming monotonicity."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ThresholdPoint:
    p: float
    eta: float | None  # None: no violation even at eta = 1

    @property
    def no_violation_in_range(self) -> bool:
        return self.eta is None


@dataclass(frozen=True)
class ThresholdCurve:
    alpha: float
    points: tuple[ThresholdPoint, ...]

    def etas(self) -> list[float | None]:
        return [pt.eta for pt in self.points]


def eta_threshold(p: float, alpha: float = 1.0, tol: float = BISECT_TOL, sd_bound: str = "reference"):
    """Minimum efficiency for an EPR violation at Werner parameter ``p``, or None."""

    def violated(eta):
        return check_epr_violation(build_model(p, eta), alpha, sd_bound).violated

    if not violated(1.0):
        return None
    return _bisect(violated, 0.0, 1.0, tol)


def threshold_curve(
    alpha: float, p_grid: Iterable[float], tol: float = BISECT_TOL, sd_bound: str = "reference"
) -> ThresholdCurve:
    pts = []
    for p in p_grid:
        p = float(p)
        if not 0.0 < p <= 1.0:
            raise ParamOutOfRange(f"p must lie in (0, 1], got {p}")
        pts.append(ThresholdPoint(p=p, eta=eta_threshold(p, alpha, tol, sd_bound)))
    return ThresholdCurve(alpha=float(alpha), points=tuple(pts))


def p_threshold(eta: float = 1.0, alpha: float = 1.0, tol: float = BISECT_TOL):
    """Minimum Werner parameter for a violation at efficiency ``eta``, or None."""

    def violated(p):
        return check_epr_violation(build_model(p, eta), alpha).violated

    if not violated(1.0):
        return None
    return _bisect(violated, 0.0, 1.0, tol)


def alpha_sweep(alphas: Sequence[float], p: float = 1.0, tol: float = BISECT_TOL) -> dict:
    """Efficiency threshold per alpha and the minimum over the sweep."""
    thresholds = {float(a): eta_threshold(p, a, tol) for a in alphas}
    found = [t for t in thresholds.values() if t is not None]
    return {"p": float(p), "thresholds": thresholds, "min_eta": min(found) if found else None}


def closed_form_threshold(p: float) -> float | None:
    """``1/(3p^2)`` when it lies in (0, 1], else None."""
    eta = 1.0 / (3.0 * p * p)
    return eta if eta <= 1.0 else None
