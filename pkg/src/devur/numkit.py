"""Small dense complex linear algebra for Hilbert spaces of dimension <= ~16.

Matrices and vectors are plain ``numpy`` ``complex128`` arrays.  The
eigensolver is a cyclic Jacobi iteration on the Hermitian matrix, so results
are deterministic for identical input and independent of LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidState,
    NoConvergence,
    NonrealExpectation,
    NotHermitian,
)

HERMITIAN_TOL = 1e-9
STATE_NORM_TOL = 1e-12
TRACE_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
DEGENERACY_TOL = 1e-8


def as_cmat(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    return a


def as_cvec(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {a.shape}")
    return a


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_cmat(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix is not square: {a.shape}")
    d = hermitian_defect(a)
    if d > tol:
        raise NotHermitian(f"||M - M^H||_max = {d:.3e} exceeds {tol:.1e}")
    return a


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a Hermitian matrix.

    ``eigenvectors[:, j]`` belongs to ``eigenvalues[j]``; eigenvalues are
    ascending.  ``classes`` partitions the indices into groups of
    numerically degenerate eigenvalues.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    classes: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @cached_property
    def class_values(self) -> np.ndarray:
        """Representative eigenvalue (mean of members) of each class."""
        sizes = np.array([len(c) for c in self.classes])
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        return np.add.reduceat(self.eigenvalues, starts) / sizes

    @cached_property
    def class_bases(self) -> tuple[np.ndarray, ...]:
        return tuple(self.eigenvectors[:, list(c)] for c in self.classes)

    @cached_property
    def class_starts(self) -> np.ndarray:
        """First eigen-index of each class (classes are consecutive runs)."""
        return np.array([c[0] for c in self.classes], dtype=np.intp)

    @cached_property
    def class_of(self) -> np.ndarray:
        """Class number of every eigen-index."""
        out = np.empty(self.dim, dtype=np.intp)
        for k, c in enumerate(self.classes):
            out[list(c)] = k
        return out

    def class_probabilities(self, state: "State") -> np.ndarray:
        """Unnormalised weight of every degeneracy class on ``state``."""
        v = self.eigenvectors
        if state.is_pure:
            amp = v.conj().T @ state.vector
            per = amp.real**2 + amp.imag**2
        else:
            per = np.einsum("ij,ik,kj->j", v.conj(), state.density, v).real
        return np.add.reduceat(per, self.class_starts)

    def projector(self, k: int) -> np.ndarray:
        """Spectral projector onto degeneracy class ``k``."""
        v = self.class_bases[k]
        return v @ v.conj().T

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _degeneracy_classes(values: np.ndarray, scale: float) -> tuple[tuple[int, ...], ...]:
    tol = DEGENERACY_TOL * max(1.0, scale)
    classes: list[list[int]] = []
    for j, v in enumerate(values):
        if classes and v - values[classes[-1][-1]] < tol:
            classes[-1].append(j)
        else:
            classes.append([j])
    return tuple(tuple(c) for c in classes)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # Largest-magnitude component of every column made real positive.
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (lead.conj() / np.abs(lead))[None, :] if vecs.size else vecs


def eig_hermitian(m, *, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> Spectrum:
    """Diagonalise a Hermitian matrix with cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot element with a
    diagonal unitary and then applies a real Givens rotation, so the pivot
    is annihilated exactly.  Sweeps run over the ``(p, q)`` pairs in row
    order until the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||M||_F)``.

    Raises
    ------
    NotHermitian
        If ``||M - M^H||_max > 1e-9``.
    NoConvergence
        If ``max_sweeps`` sweeps do not reach the tolerance.
    """
    a = check_hermitian(m).copy()
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    thresh = tol * scale

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm(x):
        return float(np.linalg.norm(x[offdiag]))

    sweeps = 0
    while off_norm(a) >= thresh:
        if sweeps >= max_sweeps:
            raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rot = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = rot.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, cols] = v[:, cols] @ rot

    vals = np.real(np.diag(a)).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = _fix_phases(v[:, order])
    classes = _degeneracy_classes(vals, float(np.max(np.abs(m))) if n else 0.0)
    return Spectrum(vals, vecs, classes)


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(r_A r_B) x (c_A c_B)``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(rho, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Reduced density matrix of a bipartite operator.

    ``dims = (d_A, d_B)`` with the joint index ``i_A * d_B + i_B``.
    """
    r = as_cmat(rho)
    da, db = dims
    if r.shape != (da * db, da * db):
        raise DimensionMismatch(f"operator of shape {r.shape} does not match dims {dims}")
    t = r.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError("keep must be 'A' or 'B'")


class State:
    """A pure vector or a density matrix.

    Use :meth:`pure` / :meth:`mixed` to build one; both validate
    normalisation.  ``density`` is always available.
    """

    __slots__ = ("kind", "vector", "_density")

    def __init__(self, kind: str, vector: np.ndarray | None, density: np.ndarray | None):
        self.kind = kind
        self.vector = vector
        self._density = density

    @classmethod
    def pure(cls, amplitudes, *, normalize: bool = False) -> "State":
        v = as_cvec(amplitudes).copy()
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InvalidState("zero vector is not a state")
        if normalize:
            v /= norm
        elif abs(norm - 1.0) > STATE_NORM_TOL:
            raise InvalidState(f"state vector has norm {norm!r}, not 1")
        return cls("pure", v, None)

    @classmethod
    def mixed(cls, rho, *, tol: float = TRACE_TOL) -> "State":
        r = check_hermitian(rho)
        tr = np.trace(r).real
        if abs(tr - 1.0) > tol:
            raise InvalidState(f"density matrix has trace {tr!r}, not 1")
        return cls("mixed", None, r)

    @property
    def dim(self) -> int:
        return len(self.vector) if self.kind == "pure" else self._density.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    @property
    def density(self) -> np.ndarray:
        if self._density is None:
            self._density = np.outer(self.vector, self.vector.conj())
        return self._density

    def probability(self, basis: np.ndarray) -> float:
        """Weight of the subspace spanned by the orthonormal columns of ``basis``."""
        if self.kind == "pure":
            amp = basis.conj().T @ self.vector
            return float(np.sum(amp.real ** 2 + amp.imag ** 2))
        return float(np.real(np.einsum("ik,ij,jk->", basis.conj(), self.density, basis)))

    def __repr__(self):
        return f"State(kind={self.kind!r}, dim={self.dim})"


def coerce_state(state) -> State:
    if isinstance(state, State):
        return state
    a = np.asarray(state, dtype=complex)
    return State.pure(a) if a.ndim == 1 else State.mixed(a)


class Observable:
    """Hermitian matrix with a lazily cached :class:`Spectrum`."""

    __slots__ = ("matrix", "label", "_spectrum")

    def __init__(self, matrix, label: str = ""):
        self.matrix = check_hermitian(matrix)
        self.label = label
        self._spectrum: Spectrum | None = None

    @classmethod
    def from_spectrum(cls, eigenvalues: Sequence[float], eigenvectors, label: str = "") -> "Observable":
        """Build ``sum_j a_j |a_j><a_j|`` from a known orthonormal eigenbasis."""
        vals = np.asarray(eigenvalues, dtype=float)
        vecs = as_cmat(eigenvectors)
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        obs = cls.__new__(cls)
        obs.matrix = (vecs * vals) @ vecs.conj().T
        obs.label = label
        obs._spectrum = Spectrum(vals, vecs, _degeneracy_classes(vals, float(np.max(np.abs(vals)))))
        return obs

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> Spectrum:
        if self._spectrum is None:
            self._spectrum = eig_hermitian(self.matrix)
        return self._spectrum

    def __repr__(self):
        return f"Observable(dim={self.dim}, label={self.label!r})"


def coerce_observable(obs) -> Observable:
    return obs if isinstance(obs, Observable) else Observable(obs)


def expval(obs, state) -> float:
    """``Tr(rho O)`` or ``<psi|O|psi>`` with an explicit imaginary-part check."""
    o = obs.matrix if isinstance(obs, Observable) else check_hermitian(obs)
    st = coerce_state(state)
    if o.shape[0] != st.dim:
        raise DimensionMismatch(f"observable dim {o.shape[0]} != state dim {st.dim}")
    if st.is_pure:
        val = np.vdot(st.vector, o @ st.vector)
    else:
        val = np.einsum("ij,ji->", st.density, o)
    if abs(val.imag) > 1e-8:
        raise NonrealExpectation(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)


# Named operators used throughout the package and the tests.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def basis_vector(dim: int, k: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[k] = 1.0
    return e


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((dim, rank or dim)) + 1j * rng.standard_normal((dim, rank or dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2
