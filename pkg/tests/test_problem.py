import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transfer_sl import BoundaryAngles, ConfigurationError, Problem, SpectralDataset, StateMatrix, load_problem, save_problem
from transfer_sl.problem import SpectralParameter, spectral_parameter


def test_matrix_normalised_to_unit_determinant():
    p = Problem.free(1.0, [[4.0, 0.0], [0.0, 1.0]])
    assert np.linalg.det(p.M) == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(p.M, [[2.0, 0.0], [0.0, 0.5]])


@pytest.mark.parametrize(
    "M",
    [[[1, 0], [0, -1]], [[0, 1], [1, 0]], [[1, 2], [1, 2]]],
)
def test_non_positive_determinant_rejected(M):
    with pytest.raises(ConfigurationError):
        Problem.free(1.0, M)


def test_m12_zero_with_nonzero_trace_accepted():
    p = Problem.free(1.0, [[-1.0, 0.0], [3.0, -1.0]])
    assert p.m12 == 0 and p.m11 + p.m22 == -2


@pytest.mark.parametrize("S", [0.0, -1.0, math.inf, math.nan])
def test_bad_half_width(S):
    with pytest.raises(ConfigurationError):
        Problem.free(S)


def test_even_sample_count_has_no_origin_node():
    with pytest.raises(ConfigurationError, match="x=0"):
        Problem(1.0, np.zeros(10), np.eye(2))


def test_non_finite_samples():
    with pytest.raises(ConfigurationError):
        Problem(1.0, [0.0, math.nan, 0.0], np.eye(2))


@pytest.mark.parametrize("steps", [999, 1001, 10])
def test_steps_must_be_even_and_fine(steps):
    with pytest.raises(ConfigurationError):
        Problem.free(1.0, steps=steps)


def test_halves_interpolated_separately():
    # a kink at 0 is reproduced exactly since each half is its own spline
    p = Problem.from_function(1.0, np.abs, n_samples=21)
    x = np.array([-0.73, -0.2, 0.0, 0.31, 0.9])
    np.testing.assert_allclose(p.q(x), np.abs(x), atol=1e-14)
    left, right = p.gauss_q
    assert left.shape == (p.steps, 2) and right.shape == (p.steps, 2)
    assert np.all(left > 0) and np.all(right > 0)


def test_angles_ranges():
    BoundaryAngles(0.0, math.pi)
    with pytest.raises(ConfigurationError):
        BoundaryAngles(math.pi, 1.0)
    with pytest.raises(ConfigurationError):
        BoundaryAngles(0.5, 0.0)


def test_state_matrices():
    H = StateMatrix.initial_alpha(1.0, 0.3)
    assert H.det == pytest.approx(1.0)
    V = StateMatrix.terminal_beta(1.0, 2.0)
    assert V.det == pytest.approx(1.0)
    assert V.data[0, 0] == pytest.approx(math.sin(2.0)) and V.data[1, 0] == pytest.approx(math.cos(2.0))


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_principal_root_upper_half_plane(lam):
    z = complex(spectral_parameter(lam))
    assert z.imag >= 0
    assert abs(z * z - lam) <= 1e-9 * max(1.0, abs(lam))


def test_spectral_parameter_roundtrip():
    sp = SpectralParameter.from_zeta(2j)
    assert sp.lam == -4
    assert SpectralParameter.from_lambda(-4).zeta == pytest.approx(2j)


def test_dataset_checks():
    with pytest.raises(ConfigurationError):
        SpectralDataset(None, None, [1.0, 1.0])
    with pytest.raises(ConfigurationError):
        SpectralDataset(None, None, [1.0, 2.0], [1.0, -1.0])
    assert len(SpectralDataset(None, None, [1.0, 2.0], [1.0, 1.0])) == 2


def test_problem_file_roundtrip(tmp_path):
    p = Problem.from_function(1.0, np.cos, [[2.0, 0.0], [0.0, 0.5]], n_samples=11)
    path = tmp_path / "p.json"
    save_problem(path, p, BoundaryAngles(0.5, 1.0))
    q, angles = load_problem(path)
    np.testing.assert_allclose(q.q_samples, p.q_samples)
    np.testing.assert_allclose(q.M, p.M)
    assert angles == BoundaryAngles(0.5, 1.0)


def test_problem_file_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "S": 1.0,\n "q_samples": [0, 0, 0],\n "M": [[1, 0], [0, 1]\n}\n')
    with pytest.raises(ConfigurationError, match=r"bad.json:\d+"):
        load_problem(path)
    path.write_text(json.dumps({"S": 1.0, "M": [[1, 0], [0, 1]]}))
    with pytest.raises(ConfigurationError, match="missing"):
        load_problem(path)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0.2, 5.0),
    st.floats(0.1, 5.0),
    st.floats(-3.0, 3.0),
    st.floats(-3.0, 3.0),
)
def test_any_positive_determinant_normalises(s, a, b, c):
    M = np.array([[a, b], [c, (1.0 + b * c) / a]]) * s  # det = s^2
    p = Problem.free(1.0, M)
    assert p.M[0, 0] * p.M[1, 1] - p.M[0, 1] * p.M[1, 0] == pytest.approx(1.0, rel=1e-12)
