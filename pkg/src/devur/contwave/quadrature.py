"""Moments, mean deviation and differential entropy of 1-D densities.

Finite panels are integrated with QUADPACK (``scipy.integrate.quad``,
adaptive Gauss-Kronrod with extrapolation).  Power-law tails
``p(x) ~ C |x|^-nu (1 + b/|x|)`` are fitted at a far cutoff and integrated
analytically beyond it; exponential tails are followed panel by panel
until the contribution falls below 1e-15.  A moment of order ``k`` on a
power tail is divergent iff ``nu - k <= 1``; tails of unknown type use a
Cauchy test over four decade cutoffs instead.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from ..errors import Cancelled, NotNormalized

NORM_TOL = 1e-6
QUAD_RTOL = 1e-11
POWER_CUTOFF_DECADES = 6
EXP_PANEL_LIMIT = 200
CAUCHY_DECADES = 4
SAMPLED_TAIL_FLOOR = 1e-14

MOMENT_NAMES = ("mean", "md", "sd")


@dataclass(frozen=True)
class Tail:
    """Decay class of one side of a density: exponential, power(nu), compact or unknown."""

    kind: str
    nu: float | None = None

    def __post_init__(self):
        if self.kind not in ("exponential", "power", "compact", "unknown"):
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "power" and (self.nu is None or self.nu <= 1):
            raise ValueError("a normalisable power tail needs nu > 1")

    @classmethod
    def power(cls, nu: float) -> "Tail":
        return cls("power", float(nu))

    def moment_finite(self, order: float) -> bool | None:
        """True/False when decidable from the exponent, None when unknown."""
        if self.kind in ("exponential", "compact"):
            return True
        if self.kind == "power":
            return self.nu - order > 1
        return None


EXPONENTIAL = Tail("exponential")
COMPACT = Tail("compact")


@dataclass(frozen=True)
class Density1D:
    """A probability density with its support and tail classification.

    ``scale`` sets the width of the first panels and ``breakpoints`` are
    points where the density is not smooth (kinks, cusps, patch joins).
    """

    pdf: Callable[[float], float]
    support: tuple[float, float] = (-math.inf, math.inf)
    tails: tuple[Tail, Tail] = (EXPONENTIAL, EXPONENTIAL)
    center: float = 0.0
    scale: float = 1.0
    breakpoints: tuple[float, ...] = ()
    name: str = ""

    def __call__(self, x):
        return self.pdf(x)


@dataclass(frozen=True)
class DispersionSummary:
    """``None`` in ``mean``/``md``/``sd`` means the quantity diverges (listed in ``divergent``)."""

    mean: float | None
    md: float | None
    sd: float | None
    diff_entropy: float | None
    norm: float
    divergent: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "md": self.md,
            "sd": self.sd,
            "diff_entropy": self.diff_entropy,
            "norm": self.norm,
            "divergent": list(self.divergent),
        }

    @classmethod
    def from_json(cls, d: dict) -> "DispersionSummary":
        return cls(
            mean=d["mean"],
            md=d["md"],
            sd=d["sd"],
            diff_entropy=d["diff_entropy"],
            norm=d["norm"],
            divergent=tuple(d.get("divergent", ())),
        )


def _check_cancel(cancel: threading.Event | None):
    if cancel is not None and cancel.is_set():
        raise Cancelled("quadrature cancelled")


def _quad(f, a, b) -> float:
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, epsabs=1e-15, epsrel=QUAD_RTOL, limit=400)
    return float(val)


def _entropy_density(pv: float) -> float:
    return -pv * math.log(pv) if pv > 0 else 0.0


@dataclass
class _Side:
    """One side of the support, walked outward from the panel origin."""

    sign: int  # +1 right, -1 left
    end: float  # finite endpoint or +-inf
    tail: Tail
    edges: list[float] = field(default_factory=list)
    tail_from: float | None = None  # distance where an analytic power tail starts


def _panel_edges(d: Density1D, origin: float, side: _Side, extra: Sequence[float]) -> None:
    s = side.sign
    dist_end = abs(side.end - origin)
    bps = sorted({abs(b - origin) for b in extra if (b - origin) * s > 0 and abs(b - origin) < dist_end})
    if math.isfinite(side.end):
        # geometric refinement towards the origin helps endpoint singularities
        base = [dist_end * 10.0**-k for k in range(6, 0, -1)] if dist_end > 0 else []
        dists = sorted(set(base + bps + [dist_end]))
    elif side.tail.kind == "power" or side.tail.kind == "unknown":
        far = max(abs(origin), d.scale) * 10.0**POWER_CUTOFF_DECADES
        base = [d.scale * 10.0**k for k in range(-2, POWER_CUTOFF_DECADES + 1)]
        dists = sorted({x for x in base + bps if x < far} | {far})
        side.tail_from = abs(origin + s * far)  # |x| at the last edge
    else:
        dists = sorted(set(bps + [d.scale * 2.0**k for k in range(0, 4)]))
    side.edges = [origin + s * x for x in dists]


def _integrate_side(
    d: Density1D, f: Callable[[float], float], origin: float, side: _Side, cancel
) -> float:
    """Integral of ``f`` from ``origin`` over the side's panels (no analytic tail)."""
    total = 0.0
    a = origin
    for b in side.edges:
        _check_cancel(cancel)
        lo, hi = (a, b) if side.sign > 0 else (b, a)
        total += _quad(f, lo, hi)
        a = b
    if not math.isfinite(side.end) and side.tail.kind == "exponential":
        # extend by doubling panels until the contribution is negligible
        width = abs(side.edges[-1] - origin) if side.edges else d.scale
        for _ in range(EXP_PANEL_LIMIT):
            _check_cancel(cancel)
            b = a + side.sign * width
            lo, hi = (a, b) if side.sign > 0 else (b, a)
            piece = _quad(f, lo, hi)
            total += piece
            a = b
            width *= 2
            if abs(piece) <= 1e-16 * max(1.0, abs(total)) and abs(f(b)) * width < 1e-16:
                break
    return total


def _fit_power_tail(pdf, x: float, nu: float, sign: int) -> tuple[float, float]:
    """``(C, b)`` with ``p(t) = C t^-nu (1 + b/t)`` matched at ``t = |x|`` and ``2|x|``."""
    t = abs(x)
    g1 = float(pdf(sign * t)) * t**nu
    g2 = float(pdf(sign * 2 * t)) * (2 * t) ** nu
    c = 2 * g2 - g1
    b = 2 * t * (g1 - g2) / c if c != 0 else 0.0
    return c, b


def _power_tail_integrals(c: float, b: float, nu: float, t0: float, sign: int, center: float):
    """Analytic tail integrals beyond ``|x| = t0`` of ``p``, ``(x - m)^k p`` for k=1,2, and ``-p ln p``.

    Returns a function ``m -> (I0, I1, I2, H)`` where ``I1`` and ``I2`` use
    the signed distance ``x - m`` (on this side ``x = sign * t``).
    """

    def j(power):  # int_{t0}^inf t^power (C t^-nu (1 + b/t)) dt
        e1 = power - nu + 1
        e2 = power - nu
        if e1 >= 0 or (b != 0 and e2 >= 0):
            return math.inf
        return c * (-(t0**e1) / e1 - (b * t0**e2 / e2 if b != 0 else 0.0))

    i0, i_1, i_2 = j(0), j(1), j(2)
    # entropy of the leading term C t^-nu
    e = 1 - nu
    h = -c * math.log(c) * (-(t0**e) / e) + c * nu * (
        -(t0**e) * math.log(t0) / e + t0**e / e**2
    )

    def at(m: float):
        s = sign
        # x - m = s t - m
        m1 = s * i_1 - m * i0 if math.isfinite(i_1) else math.copysign(math.inf, s)
        if math.isfinite(i_2) and math.isfinite(i_1):
            m2 = i_2 - 2 * s * m * i_1 + m * m * i0
        else:
            m2 = math.inf
        return i0, m1, m2, h

    return at


def dispersion(density: Density1D, cancel: threading.Event | None = None) -> DispersionSummary:
    """Mean, mean deviation, standard deviation and differential entropy (nats).

    Raises :class:`NotNormalized` when the total mass differs from 1 by more
    than 1e-6.
    """
    d = density
    pdf = d.pdf
    lo, hi = d.support
    origin = min(max(d.center, lo), hi)
    finite_by_tail = [True] * 3  # orders 0..2 combined over both sides; index = order
    unknown_side = False
    sides = [_Side(+1, hi, d.tails[1]), _Side(-1, lo, d.tails[0])]
    for side in sides:
        if math.isfinite(side.end) and side.tail.kind != "compact":
            side.tail = COMPACT
        for k in (1, 2):
            ok = side.tail.moment_finite(k)
            if ok is None:
                unknown_side = True
            elif not ok:
                finite_by_tail[k] = False
        _panel_edges(d, origin, side, d.breakpoints)

    fits = {}
    for side in sides:
        if side.tail_from is not None and side.tail.kind == "power":
            c, b = _fit_power_tail(pdf, side.tail_from, side.tail.nu, side.sign)
            fits[side.sign] = _power_tail_integrals(c, b, side.tail.nu, side.tail_from, side.sign, origin)

    def side_total(f, order):
        out = []
        for side in sides:
            out.append(_integrate_side(d, f, origin, side, cancel))
        return out

    # pass 1: mass and mean
    m0 = sum(side_total(pdf, 0))
    m1_sides = side_total(lambda x: x * pdf(x), 1)
    for sgn, at in fits.items():
        i0, i1, _, _ = at(0.0)
        m0 += i0
    if abs(m0 - 1) > NORM_TOL:
        raise NotNormalized(f"density integrates to {m0!r}")

    divergent: list[str] = []
    cauchy_ok = {1: True, 2: True}
    if unknown_side:
        for k in (1, 2):
            cauchy_ok[k] = _cauchy_converges(d, origin, k, cancel)

    mean_finite = finite_by_tail[1] and cauchy_ok[1]
    var_finite = finite_by_tail[2] and cauchy_ok[2] and mean_finite
    entropy = _entropy(d, origin, sides, fits, cancel)
    if not mean_finite:
        return DispersionSummary(None, None, None, entropy, m0, ("mean", "md", "sd"))

    mean = sum(m1_sides)
    for at in fits.values():
        mean += at(0.0)[1]
    mean /= m0

    # pass 2: centred moments about the mean
    msides = [_Side(+1, hi, sides[0].tail), _Side(-1, lo, sides[1].tail)]
    for side in msides:
        _panel_edges(d, mean, side, tuple(d.breakpoints) + (origin,))
    md = 0.0
    var = 0.0
    for side in msides:
        f1 = lambda x: abs(x - mean) * pdf(x)  # noqa: E731
        md += _integrate_side(d, f1, mean, side, cancel)
        if var_finite:
            f2 = lambda x: (x - mean) ** 2 * pdf(x)  # noqa: E731
            var += _integrate_side(d, f2, mean, side, cancel)
    for side in msides:
        if side.tail_from is not None and side.tail.kind == "power":
            c, b = _fit_power_tail(pdf, side.tail_from, side.tail.nu, side.sign)
            at = _power_tail_integrals(c, b, side.tail.nu, abs(side.tail_from), side.sign, mean)
            _, i1, i2, _ = at(mean)
            md += abs(i1)
            if var_finite:
                var += i2
    md /= m0
    if not var_finite:
        divergent.append("sd")
        sd = None
    else:
        sd = math.sqrt(var / m0)
    return DispersionSummary(mean, md, sd, entropy, m0, tuple(divergent))


def _entropy(d: Density1D, origin, sides, fits, cancel) -> float | None:
    h = 0.0
    f = lambda x: _entropy_density(float(d.pdf(x)))  # noqa: E731
    for side in sides:
        h += _integrate_side(d, f, origin, side, cancel)
    for at in fits.values():
        h += at(origin)[3]
    return h


def running_moment(density: Density1D, order: float, cutoffs: Sequence[float], center: float = 0.0,
                   cancel: threading.Event | None = None) -> list[float]:
    """``int_{|x - center| < R} |x - center|^order p(x) dx`` for each cutoff ``R``.

    No tail correction is applied; this is the raw running integral used to
    exhibit convergence or divergence.
    """
    lo, hi = density.support
    out = []
    f = lambda x: abs(x - center) ** order * density.pdf(x)  # noqa: E731
    prev_a, prev_b, acc = center, center, 0.0
    for r in sorted(cutoffs):
        _check_cancel(cancel)
        a, b = max(lo, center - r), min(hi, center + r)
        acc += _panels(f, prev_b, b, density.scale) + _panels(f, a, prev_a, density.scale)
        prev_a, prev_b = a, b
        out.append(acc)
    return out


def _panels(f, a, b, scale) -> float:
    """Integrate on geometrically growing panels between ``a`` and ``b``."""
    if b <= a:
        return 0.0
    total, x, w = 0.0, a, scale
    while x < b:
        y = min(b, x + w)
        total += _quad(f, x, y)
        x, w = y, w * 2
    return total


def _cauchy_converges(d: Density1D, origin: float, order: int, cancel) -> bool:
    """Cauchy test across four decade cutoffs on the running absolute moment."""
    r0 = max(abs(origin), d.scale) * 10.0**2
    cut = [r0 * 10.0**k for k in range(CAUCHY_DECADES)]
    vals = running_moment(d, order, cut, origin, cancel)
    inc = np.abs(np.diff(vals))
    ref = max(abs(vals[-1]), 1e-300)
    if inc[-1] <= 1e-8 * ref:
        return True
    return bool(np.all(inc[1:] < 0.5 * inc[:-1]) and inc[-1] < 1e-4 * ref)


# --- sampled densities ------------------------------------------------------


@dataclass(frozen=True)
class SampledDensity:
    """A density tabulated on a uniform grid, integrated with cubic splines.

    When a grid edge carries density above ``1e-14`` of the peak a power
    tail ``C |x - peak|^-nu`` is fitted from the edge and half-edge samples
    and integrated analytically.
    """

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.x) != len(self.values) or len(self.x) < 8:
            raise ValueError("need matching x and values with at least 8 samples")


def _spline_integral(spl: CubicSpline, a: float, b: float) -> float:
    return float(spl.integrate(a, b))


def _edge_tail(x: np.ndarray, f: np.ndarray, peak: float, right: bool):
    """Fitted ``(nu, C, t0)`` for an edge in ``t = |x - peak|``, or None if negligible."""
    fmax = float(np.max(f))
    i_edge = len(x) - 1 if right else 0
    if f[i_edge] <= SAMPLED_TAIL_FLOOR * fmax:
        return None
    t0 = abs(x[i_edge] - peak)
    t_half = t0 / 2
    xh = peak + t_half if right else peak - t_half
    fh = float(np.interp(xh, x, f))
    fe = float(f[i_edge])
    if fe <= 0 or fh <= 0:
        return None
    nu = math.log(fh / fe) / math.log(2.0)
    return nu, fe * t0**nu, t0


def sampled_dispersion(sd: SampledDensity) -> DispersionSummary:
    x = np.asarray(sd.x, dtype=float)
    f = np.clip(np.asarray(sd.values, dtype=float), 0.0, None)
    peak = float(x[int(np.argmax(f))])
    spl0 = CubicSpline(x, f)
    spl1 = CubicSpline(x, x * f)
    spl2 = CubicSpline(x, x * x * f)
    a, b = float(x[0]), float(x[-1])
    tails = [_edge_tail(x, f, peak, right=False), _edge_tail(x, f, peak, right=True)]

    def tail_moments(tail, sign, m):
        # int_{t0}^inf (sign t + peak - m)^k C t^-nu dt, k = 0, 1, 2
        if tail is None:
            return 0.0, 0.0, 0.0, True, True
        nu, c, t0 = tail

        def j(p):
            e = p - nu + 1
            return c * (-(t0**e) / e) if e < 0 else math.inf

        u = peak - m
        i0 = j(0)
        fin1 = nu - 1 > 1
        fin2 = nu - 2 > 1
        i1 = sign * j(1) + u * i0 if fin1 else math.inf
        i2 = j(2) + 2 * sign * u * j(1) + u * u * i0 if fin2 else math.inf
        return i0, i1, i2, fin1, fin2

    m0 = _spline_integral(spl0, a, b)
    t_left = tail_moments(tails[0], -1, 0.0)
    t_right = tail_moments(tails[1], +1, 0.0)
    m0 += t_left[0] + t_right[0]
    fin1 = t_left[3] and t_right[3]
    fin2 = t_left[4] and t_right[4]
    if abs(m0 - 1) > NORM_TOL:
        raise NotNormalized(f"sampled density integrates to {m0!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ent_vals = np.where(f > 0, -f * np.log(np.where(f > 0, f, 1.0)), 0.0)
    entropy = float(CubicSpline(x, ent_vals).integrate(a, b))
    if not fin1:
        return DispersionSummary(None, None, None, entropy, m0, ("mean", "md", "sd"))
    mean = (_spline_integral(spl1, a, b) + t_left[1] + t_right[1]) / m0
    mean_c = min(max(mean, a), b)
    # |x - m| split at the mean
    right = _spline_integral(spl1, mean_c, b) - mean * _spline_integral(spl0, mean_c, b)
    left = mean * _spline_integral(spl0, a, mean_c) - _spline_integral(spl1, a, mean_c)
    tl = tail_moments(tails[0], -1, mean)
    tr = tail_moments(tails[1], +1, mean)
    md = (right + left + abs(tl[1]) + abs(tr[1])) / m0
    if not fin2:
        return DispersionSummary(mean, md, None, entropy, m0, ("sd",))
    second = _spline_integral(spl2, a, b) - 2 * mean * _spline_integral(spl1, a, b) + mean * mean * _spline_integral(spl0, a, b)
    var = (second + tl[2] + tr[2]) / m0
    return DispersionSummary(mean, md, math.sqrt(max(var, 0.0)), entropy, m0, ())
