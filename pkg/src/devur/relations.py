"""Product, sum, entropic and state-independent mean-deviation relations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .deviation import check_alpha, md_uncertainty, outcome_distribution
from .errors import (
    DimensionMismatch,
    InternalViolation,
    MixedStateUnsupported,
    NeedOverlapConstant,
    NotOrthogonal,
)
from .numkit import Observable, coerce_observable, coerce_state

HOLDS_TOL = 1e-10
VIOLATION_TOL = 1e-8
ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class RelationVerdict:
    lhs: float
    rhs: float
    slack: float
    holds: bool
    witness: np.ndarray | None = None
    sign: int | None = None
    degenerate: bool = False
    # Squared component of (A' -/+ iB')|psi> along |psi>: the part of the
    # left-hand side no orthogonal witness can capture.
    along_state: float | None = None

    def to_json(self) -> dict:
        out = {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "holds": self.holds}
        if self.witness is not None:
            out["witness"] = [[float(z.real), float(z.imag)] for z in self.witness]
        if self.sign is not None:
            out["sign"] = self.sign
        if self.degenerate:
            out["degenerate"] = True
        if self.along_state is not None:
            out["along_state"] = self.along_state
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RelationVerdict":
        w = data.get("witness")
        return cls(
            lhs=float(data["lhs"]),
            rhs=float(data["rhs"]),
            slack=float(data["slack"]),
            holds=bool(data["holds"]),
            witness=None if w is None else np.array([complex(r, i) for r, i in w]),
            sign=data.get("sign"),
            degenerate=bool(data.get("degenerate", False)),
            along_state=data.get("along_state"),
        )


@dataclass
class ObservableSet:
    observables: list[Observable]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.observables = [coerce_observable(o) for o in self.observables]
        if not self.observables:
            raise ValueError("empty observable set")
        dims = {o.dim for o in self.observables}
        if len(dims) != 1:
            raise DimensionMismatch(f"observables act on different dimensions: {sorted(dims)}")
        if not self.labels:
            self.labels = [o.label or f"O{i + 1}" for i, o in enumerate(self.observables)]

    def __len__(self):
        return len(self.observables)


@dataclass(frozen=True)
class Tolerances:
    holds: float = HOLDS_TOL
    violation: float = VIOLATION_TOL
    ortho: float = ORTHO_TOL


DEFAULT_TOLERANCES = Tolerances()


def _verdict(lhs, rhs, what, tols: Tolerances, **extra) -> RelationVerdict:
    lhs, rhs = float(lhs), float(rhs)
    slack = lhs - rhs
    if slack < -tols.violation:
        raise InternalViolation(f"{what} violated: lhs={lhs!r} rhs={rhs!r} slack={slack!r}")
    return RelationVerdict(lhs=lhs, rhs=rhs, slack=slack, holds=slack >= -tols.holds, **extra)


def _primed_action(obs, psi: np.ndarray, alpha: float) -> np.ndarray:
    """``A'_alpha |psi>`` from the eigen-amplitudes of ``psi`` (no operator assembly)."""
    alpha = check_alpha(alpha)
    o = coerce_observable(obs)
    if o.dim != len(psi):
        raise DimensionMismatch(f"observable dim {o.dim} != state dim {len(psi)}")
    spec = o.spectrum
    amp = spec.eigenvectors.conj().T @ psi
    per = amp.real**2 + amp.imag**2
    probs = np.clip(np.add.reduceat(per, spec.class_starts), 0.0, None)
    probs = probs / probs.sum()
    mean = float(spec.class_values @ probs)
    roots = np.sqrt(np.abs(spec.class_values - mean) ** alpha)[spec.class_of]
    return spec.eigenvectors @ (roots * amp)


def _pure_vector(state):
    st = coerce_state(state)
    if not st.is_pure:
        raise MixedStateUnsupported("this relation is stated for pure states only")
    return st, st.vector


def product_relation(a, b, state, alpha: float = 1.0, tols: Tolerances = DEFAULT_TOLERANCES) -> RelationVerdict:
    """``D(A) D(B) >= |<[A', B']>|^2 / 4`` for primed operators of exponent alpha."""
    _, psi = _pure_vector(state)
    u, v = _primed_action(a, psi, alpha), _primed_action(b, psi, alpha)
    da, db = float(np.vdot(u, u).real), float(np.vdot(v, v).real)
    comm = np.vdot(u, v) - np.vdot(v, u)
    return _verdict(da * db, 0.25 * abs(comm) ** 2, "product relation", tols)


def orthogonal_fallback(psi: np.ndarray) -> np.ndarray:
    """First standard-basis vector made orthogonal to ``psi`` (Gram-Schmidt)."""
    best = None
    for k in range(len(psi)):
        e = np.zeros_like(psi)
        e[k] = 1.0
        e = e - psi * np.vdot(psi, e)
        n = np.linalg.norm(e)
        if n > 0.5:
            return e / n
        if best is None or n > best[0]:
            best = (n, e)
    return best[1] / best[0]


def sum_relation(
    a, b, state, perp=None, sign: int | None = None, alpha: float = 1.0,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> RelationVerdict:
    """``D(A) + D(B) >= s i<[A',B']> + |<psi|A' + s iB'|psi_perp>|^2``.

    ``sign`` defaults to the ``s`` making the commutator term non-negative.
    Without ``perp`` the witness is the normalised component of
    ``(A' - s iB')|psi>`` orthogonal to ``|psi>``, which makes the
    Cauchy-Schwarz step tight; the remaining slack then equals
    ``|<psi|(A' - s iB')|psi>|^2 = <A'>^2 + <B'>^2`` (reported as
    ``along_state``).
    """
    _, psi = _pure_vector(state)
    u, v = _primed_action(a, psi, alpha), _primed_action(b, psi, alpha)
    lhs = float(np.vdot(u, u).real + np.vdot(v, v).real)
    comm_term = float((1j * (np.vdot(u, v) - np.vdot(v, u))).real)  # i<[A',B']>
    if sign is None:
        s = 1 if comm_term >= 0 else -1
    elif sign in (1, -1):
        s = sign
    else:
        raise ValueError("sign must be +1 or -1")
    w = u - s * 1j * v  # (A' - s iB')|psi>
    along = float(abs(np.vdot(psi, w)) ** 2)
    degenerate = False
    if perp is None:
        r = w - psi * np.vdot(psi, w)
        n = np.linalg.norm(r)
        if n < 1e-12:
            degenerate = True
            perp = orthogonal_fallback(psi)
        else:
            perp = r / n
    else:
        perp = np.asarray(perp, dtype=complex)
        if perp.shape != psi.shape:
            raise DimensionMismatch("witness has the wrong dimension")
        if abs(np.linalg.norm(perp) - 1.0) > tols.ortho or abs(np.vdot(psi, perp)) > tols.ortho:
            raise NotOrthogonal("witness must be a unit vector orthogonal to the state")
    # <psi|(A' + s iB')|perp> = conj(<perp|(A' - s iB')|psi>)
    rhs = s * comm_term + float(abs(np.vdot(perp, w)) ** 2)
    return _verdict(
        lhs, rhs, "sum relation", tols, witness=perp, sign=s, degenerate=degenerate, along_state=along
    )


def shannon_entropy(probs) -> float:
    """Shannon entropy in nats."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p @ np.log(p)))


def entropic_lemma_check(obs, state, alpha: float, tols: Tolerances = DEFAULT_TOLERANCES) -> RelationVerdict:
    """``alpha D_M(O) >= H(O) - ln sum_j exp(-alpha |a_j - <O>|)``, any real alpha.

    Outcomes are the degeneracy classes of ``obs``; ``H`` is in nats.
    """
    alpha = float(alpha)
    values, probs, mean = outcome_distribution(obs, state)
    dist = np.abs(values - mean)
    md = float(probs @ dist)
    x = -alpha * dist
    xmax = x.max()
    log_partition = float(xmax + np.log(np.exp(x - xmax).sum()))
    return _verdict(alpha * md, shannon_entropy(probs) - log_partition, "entropic lemma", tols)


def tent(beta: float, eigenvalues, alpha: float) -> float:
    a = np.asarray(eigenvalues, dtype=float)
    return float(np.exp(-alpha * np.abs(a - beta)).sum())


def tent_max(eigenvalues: Sequence[float], alpha: float) -> tuple[float, float]:
    """Maximise ``f(beta) = sum_j exp(-alpha |a_j - beta|)`` over ``[min a, max a]``.

    ``f`` is convex between consecutive eigenvalues, so its maximum sits on
    the eigenvalue set; ties go to the smallest ``beta``.
    """
    alpha = check_alpha(alpha)
    a = np.asarray(eigenvalues, dtype=float)
    if a.size == 0:
        raise ValueError("empty eigenvalue list")
    cand = np.unique(a)
    vals = np.exp(-alpha * np.abs(a[None, :] - cand[:, None])).sum(axis=1)
    best = vals.max()
    k = int(np.flatnonzero(vals >= best * (1 - 1e-14))[0])
    return float(cand[k]), float(vals[k])


def maassen_uffink_constant(o1, o2) -> float:
    """``-ln max_{j,k} |<a_1^j|a_2^k>|^2`` from the two eigenbases."""
    v1 = coerce_observable(o1).spectrum.eigenvectors
    v2 = coerce_observable(o2).spectrum.eigenvectors
    return float(-np.log(np.max(np.abs(v1.conj().T @ v2) ** 2)))


def state_independent_bound(obs_set, alpha: float, overlap_constant: float | None = None) -> float:
    """Lower bound on ``sum_i D_M(O_i)`` valid for every state.

    Returns ``(C - sum_i ln max_beta f_i(beta)) / alpha``.  With two
    observables and no ``overlap_constant``, ``C`` is the Maassen-Uffink
    constant of their eigenbases.
    """
    alpha = check_alpha(alpha)
    if not isinstance(obs_set, ObservableSet):
        obs_set = ObservableSet(list(obs_set))
    if overlap_constant is None:
        if len(obs_set) != 2:
            raise NeedOverlapConstant(
                f"an overlap constant is required for {len(obs_set)} observables"
            )
        overlap_constant = maassen_uffink_constant(*obs_set.observables)
    total = sum(np.log(tent_max(o.spectrum.eigenvalues, alpha)[1]) for o in obs_set.observables)
    return float((overlap_constant - total) / alpha)


def md_sum(observables, state) -> float:
    return float(sum(md_uncertainty(o, state).value for o in observables))
