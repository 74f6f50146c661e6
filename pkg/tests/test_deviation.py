import json

import numpy as np
import pytest

from devur.deviation import DeviationReport, md_uncertainty, primed_operator, sd_uncertainty
from devur.errors import InvalidAlpha
from devur.numkit import SIGMA_Z, Observable, State, random_density_matrix, random_hermitian, random_pure_state

PLUS = np.array([1, 1]) / 2**0.5


def test_examples():
    assert md_uncertainty(SIGMA_Z, [1, 0]).value == 0.0
    assert abs(md_uncertainty(SIGMA_Z, PLUS).value - 1) < 1e-15
    th = np.pi / 6  # cos^2 = 3/4
    psi = [np.cos(th), np.sin(th)]
    assert abs(md_uncertainty(SIGMA_Z, psi).value - 0.75) < 1e-12
    assert abs(md_uncertainty(SIGMA_Z, psi, 2).value - 0.75) < 1e-12


def test_report_invariants_and_json():
    rng = np.random.default_rng(0)
    obs = Observable(random_hermitian(4, rng))
    rep = md_uncertainty(obs, random_pure_state(4, rng), 1.3)
    assert abs(sum(p for _, p, _ in rep.outcomes) - 1) < 1e-10
    assert abs(rep.value - sum(p * w for _, p, w in rep.outcomes)) < 1e-12
    back = DeviationReport.from_json(json.loads(json.dumps(rep.to_json())))
    assert back == rep


def test_primed_operator_examples():
    assert np.allclose(primed_operator(SIGMA_Z, PLUS).matrix, np.eye(2))
    assert np.allclose(primed_operator(SIGMA_Z, [1, 0]).matrix, np.diag([0, 2**0.5]))
    rng = np.random.default_rng(1)
    obs = Observable(random_hermitian(5, rng))
    vec = obs.spectrum.eigenvectors[:, 2]
    assert np.allclose(primed_operator(obs, vec, 0.7).matrix @ vec, 0, atol=1e-12)


def test_primed_square_expectation():
    rng = np.random.default_rng(2)
    for _ in range(200):
        d = int(rng.integers(2, 7))
        obs = Observable(random_hermitian(d, rng))
        psi = random_pure_state(d, rng)
        alpha = float(rng.uniform(0.2, 3))
        ap = primed_operator(obs, psi, alpha)
        sq = ap.matrix @ ap.matrix
        assert np.min(np.linalg.eigvalsh(ap.matrix)) > -1e-12
        assert abs(np.vdot(psi, sq @ psi).real - md_uncertainty(obs, psi, alpha).value) < 1e-10


def test_sd_examples():
    assert sd_uncertainty(SIGMA_Z, [1, 0]) == 0.0
    assert abs(sd_uncertainty(SIGMA_Z, PLUS) - 1) < 1e-15
    proj = np.diag([1.0, 0.0])
    psi = [0.5, 3**0.5 / 2]  # q = 1/4
    assert abs(sd_uncertainty(proj, psi) - 3**0.5 / 4) < 1e-12


def test_projector_identity_1000():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        d = int(rng.integers(2, 7))
        k = int(rng.integers(1, d))
        u = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
        obs = Observable.from_spectrum([0] * (d - k) + [1] * k, u)
        rho = State.mixed(random_density_matrix(d, rng))
        md = md_uncertainty(obs, rho).value
        var = md_uncertainty(obs, rho, 2).value
        q = md_uncertainty(obs, rho).mean
        assert abs(md - 2 * var) < 1e-12
        assert abs(md - 2 * q * (1 - q)) < 1e-12


def test_shift_and_scale_covariance():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        m = random_hermitian(d, rng)
        psi = random_pure_state(d, rng)
        c = float(rng.normal() * 3)
        alpha = float(rng.uniform(0.3, 2.5))
        base = md_uncertainty(m, psi, alpha).value
        assert abs(md_uncertainty(m + c * np.eye(d), psi, alpha).value - base) < 1e-10
        assert abs(md_uncertainty(c * m, psi, alpha).value - abs(c) ** alpha * base) < 1e-10 * max(1, abs(c) ** alpha)


def test_mixed_uses_global_mean():
    rho = 0.5 * np.diag([1, 0]) + 0.5 * np.outer(PLUS, PLUS)
    rep = md_uncertainty(SIGMA_Z, rho)
    # outcomes +1 (3/4), -1 (1/4): global mean 1/2; MD = 3/4*1/2 + 1/4*3/2
    assert abs(rep.mean - 0.5) < 1e-15
    assert abs(rep.value - 0.75) < 1e-15
    # component-wise means would give 0.5*0 + 0.5*1 = 0.5 instead
    assert abs(rep.value - 0.5) > 0.1


def test_invalid_alpha():
    for a in (0, -1, float("nan"), float("inf")):
        with pytest.raises(InvalidAlpha):
            md_uncertainty(SIGMA_Z, PLUS, a)
