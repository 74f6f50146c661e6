"""Entanglement witness from local mean-deviation relations of four projectors.

For Schmidt coefficients ``a >= b >= 0`` the projectors onto

    |P1> = a|00> + b|11>,   |P2> = a|01> + b|10>,
    |P3> = b|01> - a|10>,   |P4> = b|00> - a|11>

resolve the identity.  Separable states satisfy ``sum_i D_M(O_i) >= 4a^2 b^2``
and ``sum_i Var(O_i) >= 2a^2 b^2``.  Since ``D_M`` of a projector with weight
``q`` is ``2q(1-q)``, i.e. twice its variance, both criteria flag exactly the
same states.  Mixed separable states obey the same bound because
``2q(1-q)`` is concave in ``q``, so the minimum over separable states is
attained on pure products, which is what the stress test samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deviation import md_uncertainty
from .errors import BoundViolated, DimensionMismatch, ParamOutOfRange
from .numkit import Observable, State, coerce_state, kron

NORM_TOL = 1e-12
ENTANGLED_MARGIN = 1e-12
STRESS_TOL = 1e-10
BISECT_TOL = 1e-10
SHARD_SIZE = 4096


@dataclass(frozen=True)
class WitnessFamily:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if b < 0 or a < b:
            raise ParamOutOfRange(f"need a >= b >= 0, got a={a}, b={b}")
        if abs(a * a + b * b - 1) > NORM_TOL:
            raise ParamOutOfRange(f"need a^2 + b^2 = 1, got {a * a + b * b!r}")

    @classmethod
    def from_a2(cls, a2: float) -> "WitnessFamily":
        return cls(math.sqrt(a2), math.sqrt(1 - a2))

    @classmethod
    def normalized(cls, a: float, b: float, tol: float = 1e-6) -> "WitnessFamily":
        """Accept ``(a, b)`` with ``a^2 + b^2`` within ``tol`` of 1 and rescale."""
        r = math.hypot(a, b)
        if abs(r * r - 1) > tol:
            raise ParamOutOfRange(f"a^2 + b^2 = {r * r!r} is not 1 within {tol}")
        return cls(a / r, b / r)

    def states(self) -> np.ndarray:
        """Columns ``|P1>..|P4>`` in the basis ``|00>, |01>, |10>, |11>``."""
        a, b = self.a, self.b
        return np.array(
            [[a, 0, 0, b], [0, a, b, 0], [0, b, -a, 0], [b, 0, 0, -a]], dtype=complex
        ).T

    def observables(self) -> list[Observable]:
        cols = self.states()
        out = []
        for i in range(4):
            # rank-1 projector: eigenvalue 1 on |P_i>, 0 on the other three
            order = [j for j in range(4) if j != i] + [i]
            out.append(Observable.from_spectrum([0, 0, 0, 1], cols[:, order], label=f"O{i + 1}"))
        return out

    @property
    def md_bound(self) -> float:
        return 4 * self.a**2 * self.b**2

    @property
    def var_bound(self) -> float:
        return 2 * self.a**2 * self.b**2

    def werner(self, p: float) -> np.ndarray:
        v = self.states()[:, 0]
        return p * np.outer(v, v.conj()) + (1 - p) / 4 * np.eye(4)

    def werner_closed_form(self) -> float:
        """``sqrt(1 - 8 a^2 b^2 / 3)``."""
        return math.sqrt(max(0.0, 1 - 8 * self.a**2 * self.b**2 / 3))


@dataclass(frozen=True)
class WitnessVerdict:
    sum_md: float
    sum_var: float
    md_bound: float
    var_bound: float
    weights: tuple[float, ...]

    @property
    def entangled_by_md(self) -> bool:
        return self.sum_md < self.md_bound - ENTANGLED_MARGIN

    @property
    def entangled_by_var(self) -> bool:
        return self.sum_var < self.var_bound - ENTANGLED_MARGIN / 2

    def to_json(self) -> dict:
        return {
            "sum_md": self.sum_md,
            "sum_var": self.sum_var,
            "md_bound": self.md_bound,
            "var_bound": self.var_bound,
            "entangled_by_md": self.entangled_by_md,
            "entangled_by_var": self.entangled_by_var,
            "weights": list(self.weights),
        }


def witness(family: WitnessFamily, rho) -> WitnessVerdict:
    """Summed mean deviations and variances of the four projectors on ``rho``."""
    st = coerce_state(rho)
    if st.dim != 4:
        raise DimensionMismatch(f"witness acts on two qubits, got dim {st.dim}")
    reports = [md_uncertainty(o, st, 1.0) for o in family.observables()]
    var = [md_uncertainty(o, st, 2.0).value for o in family.observables()]
    weights = tuple(r.mean for r in reports)
    return WitnessVerdict(
        sum_md=float(sum(r.value for r in reports)),
        sum_var=float(sum(var)),
        md_bound=family.md_bound,
        var_bound=family.var_bound,
        weights=weights,
    )


def sum_md_fast(family: WitnessFamily, rho: np.ndarray) -> float:
    """``sum_i 2 q_i (1 - q_i)`` with ``q_i = <P_i|rho|P_i>``; vectorised helper."""
    cols = family.states()
    q = np.einsum("ji,jk,ki->i", cols.conj(), rho, cols).real
    return float(np.sum(2 * q * (1 - q)))


def werner_threshold(family: WitnessFamily, tol: float = BISECT_TOL) -> float:
    """Smallest Werner weight ``p`` whose state the MD witness flags (1 if none)."""

    def detected(p):
        return witness(family, State.mixed(family.werner(p))).entangled_by_md

    if not detected(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if detected(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def werner_sweep(family: WitnessFamily, p_grid) -> list[tuple[float, float, float]]:
    """Rows ``(p, sum_md, bound)`` for Werner states on ``|P1>``."""
    return [
        (float(p), witness(family, State.mixed(family.werner(p))).sum_md, family.md_bound)
        for p in p_grid
    ]


def haar_qubit(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class StressReport:
    trials: int
    seed: int
    min_sum_md: float
    bound: float
    argmin_state: np.ndarray
    generator: str = "numpy PCG64 via SeedSequence(seed).spawn per shard of 4096"

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "min_sum_md": self.min_sum_md,
            "bound": self.bound,
            "argmin_state": [[float(z.real), float(z.imag)] for z in self.argmin_state],
            "generator": self.generator,
        }


def separable_stress_test(family: WitnessFamily, trials: int, seed: int) -> StressReport:
    """Check ``sum_i D_M(O_i) >= 4a^2 b^2`` on Haar-random pure product states.

    Trials are split into shards of 4096 with independent child seeds, so the
    result depends only on ``(trials, seed)``.
    """
    if trials < 1:
        raise ParamOutOfRange("trials must be >= 1")
    cols = family.states()
    bound = family.md_bound
    nshards = -(-trials // SHARD_SIZE)
    children = np.random.SeedSequence(seed).spawn(nshards)
    best, best_state = math.inf, None
    for k, child in enumerate(children):
        n = min(SHARD_SIZE, trials - k * SHARD_SIZE)
        rng = np.random.default_rng(child)
        pa, pb = haar_qubit(rng, n), haar_qubit(rng, n)
        psi = (pa[:, :, None] * pb[:, None, :]).reshape(n, 4)
        q = np.abs(psi @ cols.conj()) ** 2
        s = np.sum(2 * q * (1 - q), axis=1)
        j = int(np.argmin(s))
        if s[j] < best:
            best, best_state = float(s[j]), psi[j].copy()
        bad = np.flatnonzero(s < bound - STRESS_TOL)
        if bad.size:
            i = int(bad[0])
            raise BoundViolated(
                f"separable state with sum_md={s[i]!r} below bound {bound!r}", state=psi[i]
            )
    return StressReport(
        trials=int(trials), seed=int(seed), min_sum_md=best, bound=bound, argmin_state=best_state
    )


def product_state(phi_a, phi_b) -> np.ndarray:
    return kron(np.asarray(phi_a, dtype=complex)[:, None], np.asarray(phi_b, dtype=complex)[:, None])[:, 0]
