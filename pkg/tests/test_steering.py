import json
import math

import numpy as np
import pytest

from devur.errors import ParamOutOfRange, SeriesNotConverged
from devur.numkit import partial_trace
from devur.steering import (
    AXES,
    InferredReport,
    alpha_bound,
    axis_deviation,
    build_model,
    check_epr_violation,
    closed_form_threshold,
    eta_threshold,
    inferred_closed_form,
    inferred_deviation,
    inferred_series,
    local_alpha_bound,
    local_md_bound,
    mean_number,
    p_threshold,
    singlet,
    threshold_curve,
    werner,
)


def _kraus_oracle(p, eta):
    """Apply an independent beam-splitter loss channel to each site of a Werner pair."""
    k0 = np.diag([math.sqrt(eta), math.sqrt(eta), 1.0])
    kp = np.zeros((3, 3))
    kp[2, 0] = math.sqrt(1 - eta)
    km = np.zeros((3, 3))
    km[2, 1] = math.sqrt(1 - eta)
    embed = np.zeros((9, 4))
    for col, row in enumerate((0, 1, 3, 4)):
        embed[row, col] = 1
    rho = embed @ werner(p) @ embed.T
    out = np.zeros((9, 9), dtype=complex)
    for ka in (k0, kp, km):
        for kb in (k0, kp, km):
            k = np.kron(ka, kb)
            out += k @ rho @ k.conj().T
    return out


@pytest.mark.parametrize("p,eta", [(0.5, 0.8), (1.0, 0.3), (0.0, 1.0), (0.77, 0.999)])
def test_model_matches_kraus_channel(p, eta):
    m = build_model(p, eta)
    assert np.allclose(m.rho_F, _kraus_oracle(p, eta), atol=1e-15)
    assert abs(np.trace(m.rho_F) - 1) < 1e-14
    assert np.linalg.eigvalsh(m.rho_F).min() > -1e-15


def test_block_weights():
    r = build_model(0.5, 0.8).rho_F.real
    assert abs(r[np.ix_((0, 1, 3, 4), (0, 1, 3, 4))].trace() - 0.64) < 1e-15
    assert abs(r[8, 8] - 0.04) < 1e-15
    assert all(abs(r[k, k] - 0.08) < 1e-15 for k in (2, 5, 6, 7))


def test_singlet_is_normalised_and_antisymmetric():
    s = singlet()
    assert abs(np.linalg.norm(s) - 1) < 1e-15
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(swap @ s, -s)


def test_isotropy_and_closed_form():
    for p in np.linspace(0, 1, 6):
        for eta in np.linspace(0.1, 1, 6):
            m = build_model(p, eta)
            devs = [inferred_deviation(m, ax) for ax in AXES]
            assert max(devs) - min(devs) < 1e-13
            assert abs(devs[0] - eta / 2 * (1 - eta**2 * p**2)) < 1e-12
            assert abs(mean_number(m) - eta) < 1e-12


def test_local_bound_is_minimum_over_local_states():
    # Brute force: summed detected MD of a site state is bounded by 3n/2 - n^2/2.
    from devur.steering import detected_deviation

    rng = np.random.default_rng(21)
    for _ in range(300):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        n = float((rho[0, 0] + rho[1, 1]).real)
        s = sum(detected_deviation(rho, ax, 1.0) for ax in AXES)
        assert s >= local_md_bound(n) - 1e-12


def test_rhs_equals_reference_expression():
    for eta in (0.2, 0.5, 0.9, 1.0):
        rep = check_epr_violation(build_model(0.8, eta))
        assert abs(rep.rhs - (3 * eta - eta**2) / 2) < 1e-12
        assert abs(rep.lhs - 1.5 * eta * (1 - eta**2 * 0.64)) < 1e-12


def test_violation_thresholds():
    for p in (0.6, 0.8, 1.0):
        assert abs(eta_threshold(p) - 1 / (3 * p * p)) < 1e-8
    assert eta_threshold(0.5) is None
    assert closed_form_threshold(0.5) is None
    assert abs(p_threshold(1.0) - 3**-0.5) < 1e-8


def test_tight_variance_bound_reproduces_md_curve():
    for p in (0.7, 0.9):
        assert abs(eta_threshold(p, 2.0, sd_bound="tight") - 1 / (3 * p * p)) < 1e-8


def test_reference_variance_curve_above_md_curve():
    c1 = threshold_curve(1.0, [0.65, 0.8, 0.95])
    c2 = threshold_curve(2.0, [0.65, 0.8, 0.95])
    for a, b, p in zip(c1.etas(), c2.etas(), (0.65, 0.8, 0.95)):
        if b is not None:
            assert b > a
            assert abs(b - 1 / (math.sqrt(3) * p)) < 1e-8


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
def test_series_matches_closed_forms(alpha):
    for eta in (0.1, 0.5, 0.9):
        assert abs(alpha_bound(eta, alpha).value - local_alpha_bound(eta, alpha)) < 1e-12
        for p in (0.3, 1.0):
            s = inferred_series(eta, p, alpha).value
            assert abs(s - inferred_closed_form(eta, p, alpha)) < 1e-12
            m = build_model(p, eta)
            first = sum(inferred_deviation(m, ax, alpha) for ax in AXES)
            assert abs(first - inferred_closed_form(eta, p, alpha)) < 1e-12


def test_axis_deviation_is_one_axis_share_of_local_bound():
    for eta in (0.2, 0.7):
        for alpha in (0.5, 1.0):
            # fully polarised along one axis: that axis has 2<J> = n, the others 0
            polarised = axis_deviation(eta, eta, alpha) + 2 * axis_deviation(eta, 0.0, alpha)
            assert abs(polarised - local_alpha_bound(eta, alpha)) < 1e-12


def test_literal_coefficients_disagree():
    good = alpha_bound(0.5, 0.8).value
    literal = alpha_bound(0.5, 0.8, terms=20, coefficients="literal").value
    assert abs(good - local_alpha_bound(0.5, 0.8)) < 1e-12
    assert abs(literal - good) > 0.1


def test_series_cap_at_unit_efficiency():
    with pytest.raises(SeriesNotConverged):
        alpha_bound(1.0, 0.5)
    v = alpha_bound(1.0, 0.5, terms=50)
    assert v.terms == 50 and v.truncation_error > 0


def test_alpha_one_series_terminates():
    v = alpha_bound(0.7, 1.0)
    assert abs(v.value - local_md_bound(0.7)) < 1e-12


def test_alpha_above_one_flagged_outside_proof_regime():
    rep = check_epr_violation(build_model(1.0, 0.9), alpha=1.5)
    assert rep.proof_regime is False
    assert check_epr_violation(build_model(1.0, 0.9), alpha=0.5).proof_regime


def test_param_validation():
    for p, eta in ((-0.1, 0.5), (1.1, 0.5), (0.5, 0.0), (0.5, 1.2)):
        with pytest.raises(ParamOutOfRange):
            build_model(p, eta)
    with pytest.raises(ParamOutOfRange):
        inferred_deviation(build_model(0.5, 0.5), "w")


def test_report_json_round_trip():
    rep = check_epr_violation(build_model(0.9, 0.6))
    assert InferredReport.from_json(json.loads(json.dumps(rep.to_json()))) == rep


def test_partial_trace_of_model_has_mean_number_eta():
    m = build_model(0.4, 0.35)
    ra = partial_trace(m.rho_F, (3, 3), keep="A")
    assert abs((ra[0, 0] + ra[1, 1]).real - 0.35) < 1e-14
