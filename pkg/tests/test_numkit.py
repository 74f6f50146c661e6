import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from devur.errors import DimensionMismatch, InvalidState, NonrealExpectation, NotHermitian
from devur.numkit import (
    SIGMA_X,
    SIGMA_Z,
    Observable,
    State,
    eig_hermitian,
    expval,
    kron,
    partial_trace,
    random_density_matrix,
    random_hermitian,
)


def test_identity_and_diagonal():
    s = eig_hermitian(np.eye(2))
    assert np.allclose(s.eigenvalues, [1, 1])
    assert np.allclose(s.eigenvectors.conj().T @ s.eigenvectors, np.eye(2))
    s = eig_hermitian(np.diag([1.0, -1.0]))
    assert np.allclose(s.eigenvalues, [-1, 1])
    assert np.allclose(np.abs(s.eigenvectors), [[0, 1], [1, 0]])


def test_pauli_x_eigenvectors():
    s = eig_hermitian(SIGMA_X)
    assert np.allclose(s.eigenvalues, [-1, 1], atol=1e-14)
    r = 2**-0.5
    assert np.allclose(s.eigenvectors[:, 0], [r, -r], atol=1e-12)
    assert np.allclose(s.eigenvectors[:, 1], [r, r], atol=1e-12)


def test_reconstruction_1000_random():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        d = int(rng.integers(2, 10))
        m = random_hermitian(d, rng)
        s = eig_hermitian(m)
        v = s.eigenvectors
        assert np.max(np.abs(s.reconstruct() - m)) < 1e-9
        assert np.max(np.abs(v.conj().T @ v - np.eye(d))) < 1e-10
        assert np.max(np.abs(m @ v - v * s.eigenvalues)) < 1e-9
        assert np.all(np.diff(s.eigenvalues) >= 0)


def test_phase_convention_and_determinism():
    rng = np.random.default_rng(5)
    m = random_hermitian(6, rng)
    a, b = eig_hermitian(m), eig_hermitian(m.copy())
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    v = a.eigenvectors
    lead = v[np.argmax(np.abs(v), axis=0), np.arange(6)]
    assert np.allclose(lead.imag, 0, atol=1e-15) and np.all(lead.real > 0)


def test_wide_scale_and_degenerate():
    rng = np.random.default_rng(9)
    for scale in (1e-6, 1e-3, 1.0, 1e3, 1e6):
        m = scale * random_hermitian(7, rng)
        s = eig_hermitian(m)
        assert np.max(np.abs(s.reconstruct() - m)) < 1e-9 * max(1.0, scale)
    u = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))[0]
    m = (u * np.array([1, 1, 1, 2, 2.0])) @ u.conj().T
    s = eig_hermitian(m)
    assert s.classes == ((0, 1, 2), (3, 4))
    assert np.allclose(s.class_values, [1, 2])


def test_not_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_kron_examples():
    assert np.allclose(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))
    bell = np.array([1, 0, 0, 1]) / 2**0.5
    assert np.allclose(kron(SIGMA_X, SIGMA_X) @ bell, bell)


def test_partial_trace_examples():
    rng = np.random.default_rng(3)
    for _ in range(200):
        da, db = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        ra, rb = random_density_matrix(da, rng), random_density_matrix(db, rng)
        rho = kron(ra, rb)
        assert np.max(np.abs(partial_trace(rho, (da, db), "A") - ra)) < 1e-12
        assert np.max(np.abs(partial_trace(rho, (da, db), "B") - rb)) < 1e-12
        big = random_density_matrix(da * db, rng)
        assert abs(np.trace(partial_trace(big, (da, db), "A")) - np.trace(big)) < 1e-12
    bell = np.array([1, 0, 0, 1]) / 2**0.5
    assert np.allclose(partial_trace(np.outer(bell, bell), (2, 2), "A"), np.eye(2) / 2)
    with pytest.raises(DimensionMismatch):
        partial_trace(np.eye(6) / 6, (2, 2))


def test_expval():
    assert expval(SIGMA_Z, [1, 0]) == 1.0
    assert abs(expval(SIGMA_Z, np.array([1, 1]) / 2**0.5)) < 1e-15
    # a corrupted (non-Hermitian) density bypassing validation exposes the residue check
    broken = State("mixed", None, np.array([[0.5, 0.5j], [0, 0.5]]))
    with pytest.raises(NonrealExpectation):
        expval(SIGMA_X, broken)


def test_state_validation():
    with pytest.raises(InvalidState):
        State.pure([1, 1])
    assert State.pure([1, 1], normalize=True).dim == 2
    with pytest.raises(InvalidState):
        State.mixed(np.eye(2))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_property_reconstruction(d, seed):
    m = random_hermitian(d, np.random.default_rng(seed))
    obs = Observable(m)
    assert np.max(np.abs(obs.spectrum.reconstruct() - m)) < 1e-9


def test_jacobi_matches_lapack():
    from devur.numkit import eig_hermitian

    rng = np.random.default_rng(99)
    for _ in range(200):
        d = int(rng.integers(1, 17))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = g + g.conj().T
        spec = eig_hermitian(m)
        ref = np.linalg.eigvalsh(m)
        assert np.max(np.abs(np.sort(spec.eigenvalues) - ref)) < 1e-11 * max(1, np.abs(ref).max())
