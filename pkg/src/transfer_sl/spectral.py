"""Forward problem: characteristic function, eigenvalues, m-function, norming constants."""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import simpson

from . import asymptotics
from .errors import ConvergenceError, NotAnEigenvalueError, PoleProximityError
from .problem import BoundaryAngles, SpectralDataset, StateMatrix
from .propagation import full_propagator, propagate
from .roots import ZERO_SNAP, find_zeros

POLE_TOL = 1e-8
EIGEN_TOL = 1e-9


def _real_if_real(values, lam):
    lam = np.asarray(lam)
    if np.isrealobj(lam) or not np.any(np.imag(lam)):
        return np.real(values)
    return values


def _scalar_or_array(values, lam):
    return values[()] if np.ndim(lam) == 0 else values


def _boundary_forms(P, alpha, beta):
    """Delta_{alpha,beta} and the m numerator from the -S -> S propagator.

    Delta = W[w_alpha, v_beta] = w(S)cos(beta) - w'(S)sin(beta), with
    [w, w'](S) = P (sin a, cos a); the numerator is the same form for u_alpha.
    """
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    w = P[..., 0, 0] * sa + P[..., 0, 1] * ca
    dw = P[..., 1, 0] * sa + P[..., 1, 1] * ca
    u = P[..., 0, 0] * ca - P[..., 0, 1] * sa
    du = P[..., 1, 0] * ca - P[..., 1, 1] * sa
    return w * cb - dw * sb, u * cb - du * sb


def delta_with_angle(problem, gamma, beta, lam):
    """v'(-S) sin(gamma) - v(-S) cos(gamma) for any real gamma (no reduction mod pi).

    gamma = alpha + pi/2 gives W[u_alpha, v_beta], which keeps the identities
    m = Delta_{alpha+pi/2} / Delta_alpha and Delta' = Delta_{alpha+pi/2} a_n sign-exact.
    """
    P = full_propagator(problem, lam)
    d, _ = _boundary_forms(P, gamma, beta)
    return _scalar_or_array(_real_if_real(d, lam), lam)


def delta(problem, angles, lam):
    """Characteristic function Delta_{alpha,beta}(lam); zeros are the eigenvalues."""
    return delta_with_angle(problem, angles.alpha, angles.beta, lam)


def m_values(problem, angles, lam):
    """m_{alpha,beta}(lam) without any pole-proximity check (vectorised)."""
    P = full_propagator(problem, lam)
    d, num = _boundary_forms(P, angles.alpha, angles.beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = num / d
    return _scalar_or_array(_real_if_real(m, lam), lam)


def local_spacing(problem, lam):
    return asymptotics.zero_spacing(problem.S, abs(lam))


def nearest_zero_offset(problem, angles, lam):
    """Newton offset Delta/Delta' at lam, i.e. the signed distance to the closest zero."""
    lam = complex(lam) if np.iscomplexobj(np.asarray(lam)) else float(lam)
    d = 1e-5 * max(1.0, abs(lam))
    vals = np.atleast_1d(delta(problem, angles, np.array([lam, lam + d, lam - d])))
    deriv = (vals[1] - vals[2]) / (2 * d)
    if deriv == 0:
        return math.inf, vals[0], deriv
    return vals[0] / deriv, vals[0], deriv


def m_function(problem, angles, lam):
    """Titchmarsh-Weyl m-function at a single lam.

    Raises PoleProximityError when lam sits within 1e-8 of the local eigenvalue
    spacing from a zero of Delta.
    """
    off, _, _ = nearest_zero_offset(problem, angles, lam)
    if abs(off) < POLE_TOL * local_spacing(problem, lam):
        raise PoleProximityError(lam, lam - off)
    return m_values(problem, angles, lam)


def v_solution(problem, beta, lam):
    """v_beta trajectory (column 0), started from v(S)=sin(beta), v'(S)=cos(beta)."""
    if not 0.0 < beta <= math.pi:
        raise ValueError(f"beta must lie in (0, pi], got {beta}")
    return propagate(problem, StateMatrix.terminal_beta(problem.S, beta), lam)


def fundamental_solution(problem, alpha, lam):
    """W_alpha trajectory: columns u_alpha, w_alpha with W_alpha(-S) = H_alpha."""
    return propagate(problem, StateMatrix.initial_alpha(problem.S, alpha), lam)


def lower_spectral_bound(delta_fn, S, M, angles, q_min=0.0, max_exponent=600.0):
    """A lam below every zero of delta_fn.

    Walks k = 2, 4, 8, ... on lam = q_min - k^2 until Delta agrees to within 30%
    with the exact q=0 Delta for the same M and angles, shifted by q_min, on two
    successive k. The leading-term formulas are not used here: for small alpha
    with m12 != 0 they only take over once k sin(alpha) >> 1, which can lie past
    float64 range.
    """
    hits = 0
    k = 2.0
    while 2 * k * S <= max_exponent:
        lam = q_min - k * k
        ref = np.real(asymptotics.free_delta(S, M, angles, -k * k))
        ratio = delta_fn(np.array([lam]))[0] / ref
        if abs(ratio - 1) < 0.3:
            hits += 1
            if hits == 2:
                return lam
        else:
            hits = 0
        k *= 2
    raise ConvergenceError("Delta never approached its q=0 form; no lower bound found")


def eigenvalues(problem, angles, n_max):
    """First ``n_max`` eigenvalues, as a SpectralDataset."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    f = lambda lam: delta(problem, angles, lam)  # noqa: E731
    q_min = min(float(problem.q_samples.min()), 0.0)
    lam_lo = lower_spectral_bound(f, problem.S, problem.M, angles, q_min)
    zeros, deriv = find_zeros(f, problem.S, n_max, lam_lo)
    return SpectralDataset(problem, angles, zeros, meta={"delta_prime": deriv, "lambda_lo": lam_lo})


def _check_eigenvalue(problem, angles, lam_n):
    off, _, _ = nearest_zero_offset(problem, angles, lam_n)
    if not abs(off) <= EIGEN_TOL * local_spacing(problem, lam_n) + ZERO_SNAP * (lam_n == 0):
        raise NotAnEigenvalueError(f"lambda={lam_n!r} is not an eigenvalue (Newton offset {off:.3g})")


def norming_constant(problem, angles, lam_n, check=True):
    """a_n = integral of w_alpha(x, lam_n)^2 over [-S, S] (composite Simpson, split at 0)."""
    if check:
        _check_eigenvalue(problem, angles, lam_n)
    traj = fundamental_solution(problem, angles.alpha, float(lam_n))
    w, _ = traj.column(1)
    w = np.real(w)
    n = problem.steps
    left = simpson(w[: n + 1] ** 2, x=traj.x[: n + 1])
    right = simpson(w[n + 1 :] ** 2, x=traj.x[n + 1 :])
    return float(left + right)


def spectrum(problem, angles, n_max, norming=False):
    ds = eigenvalues(problem, angles, n_max)
    if norming:
        ds.norming_constants = np.array(
            [norming_constant(problem, angles, lam, check=False) for lam in ds.eigenvalues]
        )
    return ds


def proportionality_constant(problem, angles, lam_n):
    """k_n = Delta_{alpha+pi/2,beta}(lam_n), so that v_beta = k_n w_alpha at lam_n."""
    return float(delta_with_angle(problem, angles.alpha + math.pi / 2, angles.beta, float(lam_n)))


def proportionality_residual(problem, angles, lam_n):
    """max |v_beta - k_n w_alpha| over the grid (values and derivatives), relative to max |v_beta|."""
    k = proportionality_constant(problem, angles, lam_n)
    v = v_solution(problem, angles.beta, float(lam_n)).states[:, :, 0]
    w = fundamental_solution(problem, angles.alpha, float(lam_n)).states[:, :, 1]
    return float(np.max(np.abs(v - k * w)) / np.max(np.abs(v))), k


def residue(problem, angles, lam_n):
    """Residue of m at lam_n from symmetric offsets eps = +-1e-5 s, +-1e-6 s, s = max(1, |lam_n|)."""
    s = max(1.0, abs(lam_n))
    eps = np.array([1e-5, -1e-5, 1e-6, -1e-6]) * s
    vals = m_values(problem, angles, lam_n + eps)
    return float(np.mean(vals * eps))


def delta_prime(problem, angles, lam, rel_step=1e-4):
    """Central difference with step rel_step times the local eigenvalue spacing."""
    d = rel_step * local_spacing(problem, lam)
    v = delta(problem, angles, np.array([lam + d, lam - d]))
    return float((v[0] - v[1]) / (2 * d))


def norming_identity_residual(problem, angles, lam_n, a_n=None):
    """Relative mismatch in Delta'(lam_n) = Delta_{alpha+pi/2,beta}(lam_n) a_n."""
    if a_n is None:
        a_n = norming_constant(problem, angles, lam_n)
    lhs = delta_prime(problem, angles, lam_n)
    rhs = proportionality_constant(problem, angles, lam_n) * a_n
    return abs(lhs - rhs) / abs(lhs)


NEUMANN_NEUMANN = BoundaryAngles(math.pi / 2, math.pi / 2)
NEUMANN_DIRICHLET = BoundaryAngles(math.pi / 2, math.pi)
