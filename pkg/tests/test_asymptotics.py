import math
import warnings

import numpy as np
import pytest

from conftest import bump
from transfer_sl import BoundaryAngles, Problem, delta, m_function, v_solution
from transfer_sl.asymptotics import (
    AsymptoticRegime,
    delta_error_envelope,
    delta_leading,
    expected_zero_count,
    free_delta,
    m_asymptote,
    v_leading,
)

KS = (10, 20, 40, 80)
MATRICES = {"diag": np.diag([2.0, 0.5]), "shear": np.array([[1.0, 1.0], [0.0, 1.0]])}
REGIMES = [(a, b, m) for m in MATRICES for a in (0.0, 0.7) for b in (math.pi, 1.2)]


@pytest.fixture(scope="module")
def bumped():
    return {k: Problem.from_function(math.pi / 2, bump, M) for k, M in MATRICES.items()}


def test_regime_classification():
    r = AsymptoticRegime.classify(0.0, math.pi, MATRICES["shear"])
    assert (r.alpha_class, r.beta_class, r.m12_class) == ("zero", "pi", "nonzero")
    r = AsymptoticRegime.classify(0.3, 2.0, MATRICES["diag"])
    assert (r.alpha_class, r.beta_class, r.m12_class) == ("nonzero", "interior", "zero")


@pytest.mark.parametrize("alpha,beta,mat", REGIMES)
def test_delta_ratio_tends_to_one(bumped, alpha, beta, mat):
    p = bumped[mat]
    angles = BoundaryAngles(alpha, beta)
    ratios = np.array([delta(p, angles, -(k**2)) / delta_leading(p.S, p.M, angles, -(k**2)) for k in KS])
    dev = np.abs(ratios - 1)
    assert np.all(np.diff(dev) < 0)
    assert dev[-1] < 0.06
    # deviation halves as k doubles: first order correction
    np.testing.assert_allclose(dev[1:] / dev[:-1], 0.5, atol=0.05)


@pytest.mark.parametrize("alpha,beta,mat", REGIMES)
def test_printed_form_is_global_sign_flip(alpha, beta, mat):
    angles = BoundaryAngles(alpha, beta)
    lam = np.array([-100.0, 3.0 + 1.0j])
    a = delta_leading(1.0, MATRICES[mat], angles, lam)
    b = delta_leading(1.0, MATRICES[mat], angles, lam, printed=True)
    np.testing.assert_allclose(a, -b)


def test_error_envelope_below_leading_term(bumped):
    p = bumped["shear"]
    angles = BoundaryAngles(0.7, 1.2)
    for k in KS:
        lam = -(k**2)
        err = abs(delta(p, angles, lam) - delta_leading(p.S, p.M, angles, lam))
        assert err < 20 * delta_error_envelope(p.S, p.M, angles, lam)
        assert delta_error_envelope(p.S, p.M, angles, lam) < abs(delta_leading(p.S, p.M, angles, lam))


@pytest.mark.parametrize("beta", [math.pi, 1.2])
@pytest.mark.parametrize("mat", list(MATRICES))
def test_v_leading_shape(beta, mat):
    p = Problem.free(math.pi / 2, MATRICES[mat])
    tr = v_solution(p, beta, -100.0)
    # first correction on the left is about |m11 + m22| / (|m12| k) when m12 != 0
    tol = 0.15 if p.m12 == 0 else 0.05 + abs(p.m11 + p.m22) / 10
    for x in (-p.S, -0.5 * p.S, 0.5 * p.S):
        v, dv = tr.sample([x])[0, :, 0]
        lv, ldv = v_leading(p.S, p.M, beta, x, -100.0)
        assert np.sign(v) == np.sign(lv.real)
        assert abs(v / lv.real - 1) < tol


def test_v_at_left_end_m12_one():
    p = Problem.free(math.pi / 2, [[0.0, 1.0], [-1.0, 0.0]])
    v = v_solution(p, math.pi, -100.0).start[0, 0]
    lv, _ = v_leading(p.S, p.M, math.pi, -p.S, -100.0)
    assert np.sign(v) == np.sign(lv.real)
    assert abs(v / lv.real - 1) < 0.15


def test_neumann_shear_delta_at_minus_400():
    p = Problem.free(math.pi / 2, MATRICES["shear"])
    angles = BoundaryAngles(math.pi / 2, math.pi / 2)
    ratio = delta_leading(p.S, p.M, angles, -400.0) / delta(p, angles, -400.0)
    assert abs(ratio - 1) <= 0.15


def test_v_leading_terminal_values():
    v, dv = v_leading(1.0, np.eye(2), math.pi, 1.0, 50.0)
    assert v == 0 and dv == pytest.approx(-1.0)
    v, dv = v_leading(1.0, np.eye(2), 1.2, 1.0, 50.0)
    assert v == pytest.approx(math.sin(1.2))
    v, dv = v_leading(1.0, np.eye(2), 1.2, 1.0, 50.0, printed=True)
    assert v == pytest.approx(-math.sin(1.2))


def test_beta_zero_warns():
    with pytest.warns(UserWarning, match="outside"):
        v, dv = v_leading(1.0, np.eye(2), 0.0, 1.0, 9.0)
    assert dv == pytest.approx(1.0)


def test_m_asymptote_examples(free):
    assert m_asymptote(0.0, -4.0) == pytest.approx(2.0)
    assert m_asymptote(BoundaryAngles(math.pi / 4, math.pi), -1e6) == pytest.approx(1.0)
    # free Dirichlet m(-k^2) = k coth(k pi): exponentially close to k
    assert m_function(free, BoundaryAngles(0.0, math.pi), -400.0) == pytest.approx(m_asymptote(0.0, -400.0).real, rel=1e-12)


def test_zero_count_matches_free_spectrum():
    # Dirichlet on [-pi/2, pi/2]: eigenvalues n^2, so count below (n + 1/2)^2 is n
    for n in (5, 20):
        assert expected_zero_count(math.pi / 2, (n + 0.5) ** 2) == pytest.approx(n, abs=1)


@pytest.mark.parametrize("lam", [2.3, -3.0, 1.0 + 2.0j])
def test_identity_jump_closed_forms(free, lam):
    z = np.sqrt(complex(lam))
    dd = BoundaryAngles(0.0, math.pi)
    # printed form is sin(2 z S)/z; ours carries the opposite sign and is exact at q=0
    assert delta_leading(free.S, free.M, dd, lam, printed=True) == pytest.approx(np.sin(math.pi * z) / z)
    assert delta_leading(free.S, free.M, dd, lam) == pytest.approx(complex(delta(free, dd, lam)), rel=1e-12)
    dn = BoundaryAngles(0.0, math.pi / 2)
    assert delta_leading(free.S, free.M, dn, lam, printed=True) == pytest.approx(np.cos(math.pi * z))
    assert delta_leading(free.S, free.M, dn, lam) == pytest.approx(complex(delta(free, dn, lam)), rel=1e-12)


def test_v_vanishes_at_right_end_for_dirichlet():
    for M in MATRICES.values():
        v, _ = v_leading(math.pi / 2, M, math.pi, math.pi / 2, -100.0)
        assert v == 0


@pytest.mark.parametrize("mat", list(MATRICES))
def test_free_delta_matches_propagation(mat):
    p = Problem.free(0.8, MATRICES[mat])
    angles = BoundaryAngles(0.3, 2.0)
    lam = np.array([-50.0, 0.0, 3.3, 2.0 + 1.0j])
    np.testing.assert_allclose(free_delta(p.S, p.M, angles, lam), delta(p, angles, lam), rtol=1e-11, atol=1e-13)
