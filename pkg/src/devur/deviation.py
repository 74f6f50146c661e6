"""Mean deviation and generalised alpha-deviations of quantum observables.

For an observable ``O = sum_a a |a><a|`` and a state with outcome weights
``p_a`` the alpha-deviation is ``sum_a p_a |a - <O>|**alpha``; ``alpha = 1``
is the mean deviation and ``alpha = 2`` the variance.  Mixed states use
``p_a = Tr(rho P_a)`` and the global mean ``Tr(rho O)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidAlpha
from .numkit import Observable, State, coerce_observable, coerce_state


@dataclass(frozen=True)
class DeviationReport:
    """Outcome table and value of an alpha-deviation.

    ``outcomes`` holds ``(eigenvalue, probability, weight)`` per degeneracy
    class with ``weight = |eigenvalue - mean|**alpha``.
    """

    mean: float
    alpha: float
    value: float
    outcomes: tuple[tuple[float, float, float], ...]

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "alpha": self.alpha,
            "value": self.value,
            "outcomes": [
                {"eigenvalue": a, "probability": p, "weight": w} for a, p, w in self.outcomes
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DeviationReport":
        return cls(
            mean=float(data["mean"]),
            alpha=float(data["alpha"]),
            value=float(data["value"]),
            outcomes=tuple(
                (float(o["eigenvalue"]), float(o["probability"]), float(o["weight"]))
                for o in data["outcomes"]
            ),
        )


@dataclass(frozen=True)
class PrimedOperator:
    """``A'_alpha = sum_a sqrt(|a - <A>|**alpha) |a><a|`` for a given state."""

    base: Observable
    alpha: float
    mean: float
    matrix: np.ndarray


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0 or not np.isfinite(alpha):
        raise InvalidAlpha(f"alpha must be a positive finite number, got {alpha!r}")
    return alpha


def outcome_distribution(obs, state) -> tuple[np.ndarray, np.ndarray, float]:
    """Class eigenvalues, class probabilities and the mean ``<O>``.

    Probabilities are clipped at zero and renormalised to absorb rounding.
    """
    o = coerce_observable(obs)
    st = coerce_state(state)
    if o.dim != st.dim:
        raise DimensionMismatch(f"observable dim {o.dim} != state dim {st.dim}")
    spec = o.spectrum
    probs = np.clip(spec.class_probabilities(st), 0.0, None)
    probs = probs / probs.sum()
    values = spec.class_values
    return values, probs, float(values @ probs)


def deviation_weights(values, mean: float, alpha: float) -> np.ndarray:
    return np.abs(np.asarray(values, dtype=float) - mean) ** alpha


def md_uncertainty(obs, state, alpha: float = 1.0) -> DeviationReport:
    """Alpha-deviation ``sum_j p_j |a_j - <O>|**alpha`` of ``obs`` on ``state``.

    Examples
    --------
    >>> from devur.numkit import SIGMA_Z
    >>> md_uncertainty(SIGMA_Z, [2 ** -0.5, 2 ** -0.5]).value
    1.0
    """
    alpha = check_alpha(alpha)
    values, probs, mean = outcome_distribution(obs, state)
    weights = deviation_weights(values, mean, alpha)
    value = float(probs @ weights)
    outcomes = tuple((float(a), float(p), float(w)) for a, p, w in zip(values, probs, weights))
    return DeviationReport(mean=mean, alpha=alpha, value=value, outcomes=outcomes)


def primed_operator(obs, state, alpha: float = 1.0) -> PrimedOperator:
    """Positive operator whose squared expectation is the alpha-deviation."""
    alpha = check_alpha(alpha)
    o = coerce_observable(obs)
    values, _, mean = outcome_distribution(o, state)
    roots = np.sqrt(deviation_weights(values, mean, alpha))[o.spectrum.class_of]
    v = o.spectrum.eigenvectors
    m = (v * roots) @ v.conj().T
    return PrimedOperator(base=o, alpha=alpha, mean=mean, matrix=m)


def sd_uncertainty(obs, state) -> float:
    """Standard deviation, the square root of the alpha = 2 deviation."""
    return float(np.sqrt(md_uncertainty(obs, state, 2.0).value))
