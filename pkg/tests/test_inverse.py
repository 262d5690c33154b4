import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import HALF_PI
from transfer_sl import (
    BoundaryAngles,
    ConfigurationError,
    ConvergenceError,
    InsufficientDataError,
    MittagLefflerModel,
    PoleProximityError,
    TwoSpectraInput,
    constant_C,
    delta,
    eigenvalues,
    hadamard_ratio,
    m_from_norming,
    m_from_two_spectra,
    m_function,
    m_prime_at_zero,
)
from transfer_sl.inverse import SpectralTail, m0_from_asymptotic_constant

N = 2000
n = np.arange(1, N + 1, dtype=float)
LAMS = n**2
MUS = (n - 0.5) ** 2  # (k + 1/2)^2, k >= 0
FREE = TwoSpectraInput(LAMS, MUS, 0.0, HALF_PI, N)


def coth(x):
    return 1 / math.tanh(x)


def test_ratio_at_zero_is_one():
    assert hadamard_ratio(FREE, 0.0) == 1.0
    assert hadamard_ratio(FREE, 0.0, tail=True) == pytest.approx(1.0, abs=1e-15)


def test_ratio_closed_forms():
    # prod(1 - lam/mu) / prod(1 - lam/n^2) = cos(pi z) * pi z / sin(pi z)
    assert hadamard_ratio(FREE, -1.0, tail=True) == pytest.approx(math.pi * coth(math.pi), rel=1e-9)
    assert hadamard_ratio(FREE, -1e4, tail=True) == pytest.approx(100 * math.pi * coth(100 * math.pi), rel=1e-6)


def test_ratio_truncation_shrinks_with_n():
    ref = math.pi * coth(math.pi)
    half = TwoSpectraInput(LAMS, MUS, 0.0, HALF_PI, N // 2)
    e_full = abs(hadamard_ratio(FREE, -1.0) - ref)
    e_half = abs(hadamard_ratio(half, -1.0) - ref)
    assert e_full < 1e-3 and e_full < e_half
    assert abs(hadamard_ratio(FREE, -1.0, tail=True) - ref) < 1e-3 * e_full


def test_ratio_complex_and_vectorised():
    lam = np.array([-1.0, 2.0 + 1.0j])
    r = hadamard_ratio(FREE, lam, tail=True)
    z = np.sqrt(lam.astype(complex))
    ref = np.cos(math.pi * z) * math.pi * z / np.sin(math.pi * z)
    np.testing.assert_allclose(r, ref, rtol=1e-8)


def test_constant_free():
    C = constant_C(FREE)
    assert C.value == pytest.approx(1 / math.pi, abs=1e-9)
    assert C.error < 1e-6 and len(C.samples) == 3


def test_constant_without_tail_fails_to_settle():
    with pytest.raises(ConvergenceError, match="truncation"):
        constant_C(FREE, tail=False)


@pytest.fixture(scope="module")
def quarter_spectra(free):
    beta = math.pi
    out = {}
    for a in (math.pi / 4, HALF_PI, 0.0):
        out[a] = eigenvalues(free, BoundaryAngles(a, beta), N).eigenvalues
    return out


@pytest.mark.parametrize("alpha,alpha_prime", [(math.pi / 4, HALF_PI), (HALF_PI, 0.0)])
def test_constant_matches_delta_at_zero(free, quarter_spectra, alpha, alpha_prime):
    inp = TwoSpectraInput(quarter_spectra[alpha], quarter_spectra[alpha_prime], alpha, alpha_prime)
    C = constant_C(inp)
    ref = delta(free, BoundaryAngles(alpha_prime, math.pi), 0.0) / delta(free, BoundaryAngles(alpha, math.pi), 0.0)
    assert C.value == pytest.approx(ref, rel=1e-3)
    m = m_from_two_spectra(inp, -2.0, C=C.value)
    assert m == pytest.approx(m_function(free, BoundaryAngles(alpha, math.pi), -2.0), rel=1e-3)


def test_m_two_spectra_examples():
    assert m_from_two_spectra(FREE, -1.0) == pytest.approx(coth(math.pi), rel=1e-8)
    assert m_from_two_spectra(FREE, -4.0) == pytest.approx(2 * coth(2 * math.pi), rel=1e-8)
    for k in (50.0, 200.0):
        assert m_from_two_spectra(FREE, -k * k) / k == pytest.approx(1.0, abs=1e-6)


def test_two_spectra_input_errors():
    with pytest.raises(ConfigurationError):
        TwoSpectraInput(LAMS, MUS, 0.0, 0.0)
    with pytest.raises(ConfigurationError):
        TwoSpectraInput(LAMS[::-1], MUS, 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        TwoSpectraInput(LAMS, MUS, 0.0, 1.0, truncation=N + 1)
    with pytest.raises(InsufficientDataError):
        TwoSpectraInput([], MUS, 0.0, 1.0)
    with pytest.raises(PoleProximityError):
        hadamard_ratio(FREE, 4.0)
    with pytest.raises(InsufficientDataError):
        constant_C(TwoSpectraInput(LAMS[:3], MUS[:3], 0.0, 1.0))


# free Dirichlet: lam_n = n^2, a_n = pi / (2 n^2), m(0) = 1/pi
A_N = math.pi / (2 * LAMS)


def test_norming_alpha_zero():
    model = MittagLefflerModel(LAMS, A_N, 0.0, m0=1 / math.pi)
    val, bound = m_from_norming(model, -1.0)
    assert val == pytest.approx(coth(math.pi), abs=1e-9)
    assert bound < 1e-3
    raw, _ = m_from_norming(MittagLefflerModel(LAMS, A_N, 0.0, m0=1 / math.pi, tail=False), -1.0)
    assert abs(raw - coth(math.pi)) <= bound


def test_norming_alpha_nonzero(free):
    angles = BoundaryAngles(HALF_PI, HALF_PI)
    lam = np.arange(0, N, dtype=float) ** 2
    a = np.full(N, math.pi / 2)
    a[0] = math.pi
    model = MittagLefflerModel(lam, a, HALF_PI)
    assert model.expansion_point == -1.0
    val, _ = m_from_norming(model, -1.0)
    assert val == pytest.approx(m_function(free, angles, -1.0), rel=1e-6)


def test_tail_bound_shrinks_with_truncation():
    b = [m_from_norming(MittagLefflerModel(LAMS, A_N, 0.0, m0=0.3, truncation=t), -5.0)[1] for t in (250, 500, 1000)]
    assert b[0] > b[1] > b[2]


def test_m_prime_examples():
    base = MittagLefflerModel(LAMS, A_N, 0.0, m0=1 / math.pi)
    v, rem = m_prime_at_zero(base)
    assert v == pytest.approx(-math.pi / 3, abs=1e-9)
    # without the tail: N-doubling moves the partial sum by less than 2/(pi N)
    p1, _ = m_prime_at_zero(MittagLefflerModel(LAMS, A_N, 0.0, m0=0.0, truncation=N // 2, tail=False))
    p2, _ = m_prime_at_zero(MittagLefflerModel(LAMS, A_N, 0.0, m0=0.0, tail=False))
    assert abs(p2 - p1) < 2 / (math.pi * (N // 2))
    v2, _ = m_prime_at_zero(MittagLefflerModel(LAMS, 2 * A_N, 0.0, m0=1 / math.pi))
    assert v2 == pytest.approx(v / 2, rel=1e-14)


def test_m0_from_asymptotic_constant():
    est = m0_from_asymptotic_constant(LAMS, A_N, 0.0)
    assert est.value == pytest.approx(1 / math.pi, abs=1e-7)


def test_model_errors():
    with pytest.raises(ConfigurationError, match="m\\(0\\)"):
        MittagLefflerModel(LAMS, A_N, 0.0)
    with pytest.raises(ConfigurationError):
        MittagLefflerModel(LAMS, -A_N, 0.0, m0=0.0)
    with pytest.raises(ConfigurationError):
        MittagLefflerModel(LAMS, A_N[:-1], 0.0, m0=0.0)
    with pytest.raises(PoleProximityError):
        m_from_norming(MittagLefflerModel(LAMS, A_N, 0.0, m0=0.0), 9.0)


def test_tail_sums_match_brute_force():
    t = SpectralTail.fit(MUS, 1000)
    big = (np.arange(1000, 400_000) + 0.5) ** 2  # the true remainder, truncated far out
    assert t.inverse_power_sum(2) == pytest.approx(np.sum(big**-2.0), rel=1e-6)
    # brute force misses about -1/400000 beyond its last term
    assert t.series(-3.0) == pytest.approx(np.sum(1 / (-3.0 - big)) - 1 / 400_000, rel=1e-6)
    assert np.exp(t.log_product(-3.0)) == pytest.approx(np.prod(1 + 3.0 / big), rel=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.floats(-400.0, -0.05))
def test_two_spectra_closed_form_property(lam):
    z = math.sqrt(-lam)
    assert m_from_two_spectra(FREE, lam, C=1 / math.pi) == pytest.approx(z * coth(math.pi * z), rel=1e-7)
