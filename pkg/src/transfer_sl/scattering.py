"""Full-line scattering for a potential supported in [-S, S] with a transfer jump at 0.

Outside [-S, S] the Jost solutions are plane waves, so everything reduces to
the propagator across the interval:

    f_-(x) = e^{-i zeta x} for x <= -S,   f_+(x) = e^{i zeta x} for x >= S,
    f_-(x, xi) = A(xi) f_+(x, -xi) + B(xi) f_+(x, xi),   R = B / A.

A and B are entire in zeta apart from a simple pole at 0, which lets the
finite-interval fundamental matrix at x=S be rebuilt from them at any
complex spectral parameter.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import asymptotics
from .errors import ConfigurationError, InsufficientDataError, TransferSLError
from .problem import BoundaryAngles, SpectralDataset, StateMatrix
from .propagation import full_propagator, propagate
from .roots import find_zeros
from .spectral import lower_spectral_bound
from .tables import read_csv_columns

log = logging.getLogger(__name__)

UNITARITY_TOL = 1e-8
ZERO_PATCH_RADIUS = 0.25  # |lam| below this is evaluated through a Taylor patch
_PATCH_NODES = 32
_PATCH_RHO = 1.0


class SingularSystemError(TransferSLError, ValueError):
    """zeta = 0: the plane waves e^{+-i zeta x} coincide."""


def _zeta_array(zeta):
    z = np.asarray(zeta)
    if np.any(z == 0):
        raise SingularSystemError("zeta = 0 is excluded: the two plane waves coincide")
    return z


def _lam_of(z):
    lam = z * z
    return lam.real if np.isrealobj(z) else lam


@dataclass
class JostPair:
    """Jost solutions on [-S, S] (column 0 of each trajectory) plus exact exterior plane waves."""

    problem: object
    zeta: complex
    plus: object  # Trajectory started at x=S from (e^{i zeta S}, i zeta e^{i zeta S})
    minus: object  # Trajectory started at x=-S from (e^{i zeta S}, -i zeta e^{i zeta S})

    def _eval(self, traj, x, outer_sign, outside):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = self.zeta
        val = np.empty(x.shape, dtype=complex)
        der = np.empty(x.shape, dtype=complex)
        out = outside(x)
        val[out] = np.exp(outer_sign * 1j * z * x[out])
        der[out] = outer_sign * 1j * z * val[out]
        if np.any(~out):
            st = traj.sample(x[~out])
            val[~out], der[~out] = st[:, 0, 0], st[:, 1, 0]
        return val, der

    def f_plus(self, x):
        """(f_+, f_+') at x; exactly e^{i zeta x} for x >= S."""
        return self._eval(self.plus, x, 1, lambda x: x >= self.problem.S)

    def f_minus(self, x):
        """(f_-, f_-') at x; exactly e^{-i zeta x} for x <= -S."""
        return self._eval(self.minus, x, -1, lambda x: x <= -self.problem.S)

    @property
    def h1_at_zero(self):
        """f_+ continued across the jump, at 0- (M^{-1} applied to the 0+ state)."""
        return self.plus.left[:, 0]

    @property
    def h2_at_zero(self):
        """f_- continued across the jump, at 0+ (M applied to the 0- state)."""
        return self.minus.right[:, 0]


def jost(problem, zeta):
    """Jost pair at a single spectral parameter zeta != 0 with Im zeta >= 0."""
    z = complex(zeta)
    if z == 0:
        raise SingularSystemError("zeta = 0 is excluded")
    if z.imag < 0:
        raise ConfigurationError("Jost solutions are defined for Im zeta >= 0")
    S = problem.S
    e = np.exp(1j * z * S)
    ei = np.exp(-1j * z * S)
    # column 1 carries the companion plane wave so each frame is invertible
    init_plus = StateMatrix(S, [[e, ei], [1j * z * e, -1j * z * ei]])
    init_minus = StateMatrix(-S, [[e, ei], [-1j * z * e, 1j * z * ei]])
    lam = z * z
    return JostPair(problem, z, propagate(problem, init_plus, lam), propagate(problem, init_minus, lam))


def _ab_from_propagator(P, z, S):
    """A, B by matching f_- against e^{-+i zeta x} at x = S."""
    e = np.exp(1j * z * S)
    f = P[..., 0, 0] * e - P[..., 0, 1] * 1j * z * e
    df = P[..., 1, 0] * e - P[..., 1, 1] * 1j * z * e
    g = df / (1j * z)
    A = np.exp(1j * z * S) * (f - g) / 2
    B = np.exp(-1j * z * S) * (f + g) / 2
    return A, B


def _ab_at_minus_S(P, z, S):
    """A, B by matching at x = -S, where f_- is exactly e^{-i zeta x}."""
    Pinv = np.empty_like(P)
    Pinv[..., 0, 0], Pinv[..., 1, 1] = P[..., 1, 1], P[..., 0, 0]
    Pinv[..., 0, 1], Pinv[..., 1, 0] = -P[..., 0, 1], -P[..., 1, 0]
    e, ei = np.exp(1j * z * S), np.exp(-1j * z * S)
    # f_+(-S, zeta) and f_+(-S, -zeta)
    fp = Pinv @ np.stack([e, 1j * z * e], -1)[..., None]
    fm = Pinv @ np.stack([ei, -1j * z * ei], -1)[..., None]
    rhs = np.stack([e, -1j * z * e], -1)
    sys = np.concatenate([fm, fp], -1)
    sol = np.linalg.solve(sys, rhs[..., None])[..., 0]
    return sol[..., 0], sol[..., 1]


def scattering_coefficients(problem, xi, at="S"):
    """(A(xi), B(xi)) for real or complex xi != 0, from a 2x2 match at x=S (or x=-S)."""
    z = _zeta_array(xi)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    P = full_propagator(problem, _lam_of(z))
    if at == "S":
        A, B = _ab_from_propagator(P, z, problem.S)
    elif at == "-S":
        A, B = _ab_at_minus_S(P.astype(complex), z, problem.S)
    else:
        raise ValueError("matching point must be 'S' or '-S'")
    return (A[0], B[0]) if scalar else (A, B)


@dataclass
class ForwardAB:
    """A, B at arbitrary complex zeta by re-running the forward recursion."""

    problem: object

    def __call__(self, zeta):
        return scattering_coefficients(self.problem, zeta)

    @property
    def S(self):
        return self.problem.S


@dataclass
class ScatteringData:
    xi: np.ndarray
    R: np.ndarray
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    bound_states: tuple = ()
    S: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float).ravel()
        self.R = np.asarray(self.R, dtype=complex).ravel()
        if self.xi.size == 0 or self.R.shape != self.xi.shape:
            raise ConfigurationError("xi and R must be non-empty and of equal length")
        if np.any(self.xi <= 0) or np.any(np.diff(self.xi) <= 0):
            raise ConfigurationError("xi grid must be positive and strictly increasing")
        if np.any(np.abs(self.R) >= 1):
            raise ConfigurationError("|R| must stay below 1 on the real grid")
        if (self.A is None) != (self.B is None):
            raise ConfigurationError("A and B must be given together")
        if self.A is not None:
            self.A = np.asarray(self.A, dtype=complex).ravel()
            self.B = np.asarray(self.B, dtype=complex).ravel()
        self.bound_states = tuple(float(e) for e in self.bound_states)
        if any(e <= 0 for e in self.bound_states):
            raise ConfigurationError("bound-state eta values must be positive")

    @property
    def has_ab(self):
        return self.A is not None

    def unitarity_defect(self):
        if not self.has_ab:
            raise InsufficientDataError("no A/B samples")
        return np.abs(np.abs(self.A) ** 2 - np.abs(self.B) ** 2 - 1)


def bound_states(problem, eta_max=None, samples=2000):
    """eta_j > 0 with A(i eta_j) = 0, i.e. line eigenvalues lam = -eta_j^2.

    A(i eta) is real; zeros are bracketed on a uniform eta grid and bisected.
    """
    S = problem.S
    if eta_max is None:
        eta_max = 50.0 / S
    eta = np.linspace(eta_max / samples, eta_max, samples)
    f = lambda e: np.real(scattering_coefficients(problem, 1j * np.asarray(e, dtype=float))[0])  # noqa: E731
    vals = f(eta)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = [brentq(lambda e: float(f(e)), eta[i], eta[i + 1], xtol=1e-14, rtol=1e-15) for i in idx]
    return tuple(sorted(roots, reverse=True))


def reflection(problem, xi_grid, with_ab=True, find_bound_states=True):
    xi = np.asarray(xi_grid, dtype=float)
    if np.any(xi == 0):
        raise SingularSystemError("xi grid must exclude 0")
    A, B = scattering_coefficients(problem, xi)
    bs = bound_states(problem) if find_bound_states else ()
    return ScatteringData(
        xi, B / A, A if with_ab else None, B if with_ab else None, bs, problem.S,
        meta={"M": problem.M.tolist()},
    )


# --- recovery of the fundamental matrix at x = S --------------------------------


def _w_from_ab(Ap, Bp, Am, Bm, z, S, alpha):
    """[[w1, w2], [w1', w2']](S) from A(+-zeta), B(+-zeta); columns start as H_alpha."""
    em, ep = np.exp(-1j * z * S), np.exp(1j * z * S)
    row = np.stack([em, ep], -1)[..., None, :]
    drow = np.stack([-1j * z * em, 1j * z * ep], -1)[..., None, :]
    mid = np.stack([np.stack([Ap, Bm], -1), np.stack([Bp, Am], -1)], -2)
    split = np.stack(
        [np.stack([em / 2, -em / (2j * z)], -1), np.stack([ep / 2, ep / (2j * z)], -1)], -2
    )
    c, s = math.cos(alpha), math.sin(alpha)
    H = np.array([[c, s], [-s, c]])
    core = mid @ split @ H
    return np.concatenate([row @ core, drow @ core], -2)


def recover_W_at_S(data: ScatteringData, alpha, S=None, phase_retrieval=False):
    """Rebuild W_alpha(S, xi) on the data grid from A, B.

    Returns ``(w1, w2, w1', w2')`` as arrays over ``data.xi``. Without A/B the
    phase of A can be retrieved from |R| (``phase_retrieval=True``, see
    ``retrieve_ab_from_reflection``).
    """
    S = data.S if S is None else S
    if S is None:
        raise ConfigurationError("half-width S is required")
    if not data.has_ab:
        if not phase_retrieval:
            raise InsufficientDataError(
                "A/B samples are missing; pass phase_retrieval=True to reconstruct them from R"
            )
        data = retrieve_ab_from_reflection(data)
    z = data.xi
    W = _w_from_ab(data.A, data.B, np.conj(data.A), np.conj(data.B), z, S, alpha)
    return W[:, 0, 0], W[:, 0, 1], W[:, 1, 0], W[:, 1, 1]


@dataclass
class RecoveredW:
    """W_alpha(S, lam) rebuilt from an A/B source, entire in lam.

    Near lam = 0 the 1/zeta factors cancel badly, so |lam| < ZERO_PATCH_RADIUS
    is served by a Taylor series whose coefficients come from a circle of
    radius _PATCH_RHO in the lam plane.
    """

    source: object  # callable zeta -> (A, B)
    S: float
    alpha: float
    _taylor: np.ndarray | None = field(default=None, init=False, repr=False)

    def _direct(self, lam):
        z = np.sqrt(np.asarray(lam, dtype=complex))
        Ap, Bp = self.source(z)
        Am, Bm = self.source(-z)
        return _w_from_ab(Ap, Bp, Am, Bm, z, self.S, self.alpha)

    def _coefficients(self):
        if self._taylor is None:
            theta = 2 * math.pi * (np.arange(_PATCH_NODES) + 0.5) / _PATCH_NODES
            nodes = _PATCH_RHO * np.exp(1j * theta)
            vals = self._direct(nodes)
            k = np.arange(_PATCH_NODES)
            # c_k = mean(f(node) node^-k)
            self._taylor = np.einsum("jab,jk->kab", vals, np.exp(-1j * np.outer(theta, k))) / _PATCH_NODES
            self._taylor /= (_PATCH_RHO ** k)[:, None, None]
        return self._taylor

    def __call__(self, lam):
        lam = np.asarray(lam)
        flat = np.atleast_1d(lam).astype(complex).ravel()
        out = np.empty(flat.shape + (2, 2), dtype=complex)
        near = np.abs(flat) < ZERO_PATCH_RADIUS
        if np.any(~near):
            out[~near] = self._direct(flat[~near])
        if np.any(near):
            c = self._coefficients()
            powers = flat[near][:, None] ** np.arange(c.shape[0])
            out[near] = np.einsum("jk,kab->jab", powers, c)
        out = out.reshape(np.shape(lam) + (2, 2))
        if np.isrealobj(lam):
            out = out.real
        return out


def _cauchy_derivative(fn, lam, rho, nodes=8):
    theta = 2 * math.pi * np.arange(nodes) / nodes
    pts = lam[:, None] + rho[:, None] * np.exp(1j * theta)
    vals = fn(pts)
    return np.real(np.mean(vals * np.exp(-1j * theta), axis=1) / rho)


def neumann_data_from_scattering(source, S, M, n_max, n_norming=None):
    """Neumann-Neumann and Neumann-Dirichlet spectral data from A/B.

    ``source`` is a callable zeta -> (A, B) valid off the real axis, such as
    ``ForwardAB`` or ``FittedAB``. Returns ``(nn, nd)`` SpectralDatasets; the
    NN set carries norming constants for its first ``n_norming`` entries
    (all of them by default), the rest of the list is left without them.
    """
    if isinstance(source, ScatteringData):
        raise InsufficientDataError(
            "gridded scattering data needs an analytic stand-in; wrap it with FittedAB first"
        )
    rec = RecoveredW(source, S, math.pi / 2)
    # w1 = u (u(-S) = 0, u'(-S) = -1), w2 = w (w(-S) = 1, w'(-S) = 0)
    d_nn = lambda lam: -rec(lam)[..., 1, 1]  # noqa: E731  beta = pi/2: Delta = -w2'(S)
    d_nd = lambda lam: -rec(lam)[..., 0, 1]  # noqa: E731  beta = pi:   Delta = -w2(S)
    M = np.asarray(M, dtype=float)
    out = []
    for beta, fn in ((math.pi / 2, d_nn), (math.pi, d_nd)):
        angles = BoundaryAngles(math.pi / 2, beta)
        lo = lower_spectral_bound(lambda lam: np.real(fn(lam)), S, M, angles)
        zeros, _ = find_zeros(lambda lam: np.real(fn(lam)), S, n_max, lo)
        out.append(SpectralDataset(None, angles, zeros, meta={"lambda_lo": lo, "source": "scattering"}))
    nn, nd = out
    k = nn.eigenvalues.size if n_norming is None else min(int(n_norming), nn.eigenvalues.size)
    lam_n = nn.eigenvalues[:k]
    spacing = np.array([asymptotics.zero_spacing(S, l) for l in lam_n])
    dprime = _cauchy_derivative(d_nn, lam_n, 1e-3 * spacing)
    v_minus_S = -np.real(rec(lam_n)[..., 1, 0])  # v(-S) = W[w1, v](S) = -w1'(S)
    a = dprime / v_minus_S
    nn.meta["norming_constants"] = a
    if k == nn.eigenvalues.size:
        nn.norming_constants = a
    return nn, nd


# --- analytic stand-ins for gridded data (experimental) ------------------------


@dataclass
class FittedAB:
    """Least-squares rational fit of zeta*A and zeta*B on a real grid (experimental).

    Both are fitted as P(t)/Q(t) in t = zeta/scale with a shared denominator,
    using the mirrored grid -xi (conjugate data). ``residual`` is the max
    relative misfit on the input grid.
    """

    p_a: np.ndarray
    p_b: np.ndarray
    q: np.ndarray
    scale: float
    residual: float
    S: float | None = None

    @classmethod
    def fit(cls, data: ScatteringData, degree=8):
        if not data.has_ab:
            raise InsufficientDataError("fitting needs A/B samples")
        xi = np.concatenate([-data.xi[::-1], data.xi])
        A = np.concatenate([np.conj(data.A[::-1]), data.A]) * xi
        B = np.concatenate([np.conj(data.B[::-1]), data.B]) * xi
        scale = float(np.max(np.abs(xi)))
        t = xi / scale
        V = np.vander(t, degree + 1, increasing=True).astype(complex)
        n = degree + 1
        # unknowns: p_a (n), p_b (n), q[1:] (degree); q[0] = 1
        rows_a = np.concatenate([V, np.zeros_like(V), -A[:, None] * V[:, 1:]], 1)
        rows_b = np.concatenate([np.zeros_like(V), V, -B[:, None] * V[:, 1:]], 1)
        lhs = np.concatenate([rows_a, rows_b])
        rhs = np.concatenate([A, B])
        sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        p_a, p_b, q = sol[:n], sol[n : 2 * n], np.concatenate([[1.0], sol[2 * n :]])
        fitted = cls(p_a, p_b, q, scale, 0.0, data.S)
        Af, Bf = fitted(data.xi)
        res = max(np.max(np.abs(Af - data.A) / np.abs(data.A)), np.max(np.abs(Bf - data.B) / np.maximum(np.abs(data.A), 1e-300)))
        fitted.residual = float(res)
        return fitted

    def __call__(self, zeta):
        z = np.asarray(zeta, dtype=complex)
        t = z / self.scale
        den = np.polynomial.polynomial.polyval(t, self.q)
        A = np.polynomial.polynomial.polyval(t, self.p_a) / den / z
        B = np.polynomial.polynomial.polyval(t, self.p_b) / den / z
        return A, B


def _hilbert_even(xi, u):
    """(1/pi) PV int_{-inf}^{inf} u(t)/(x - t) dt for even u sampled on xi > 0 (zero beyond the grid).

    Singularity subtraction: the u(x) part is integrated in closed form
    (log((L+x)/(L-x))); the remainder is smooth and goes to the trapezoid rule.
    """
    L = xi[-1]
    x = xi[:, None]
    t = xi[None, :]
    du = np.gradient(u, xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (u[None, :] - u[:, None]) * 2 * x / (x * x - t * t)
    diag = np.arange(xi.size)
    k[diag, diag] = -du  # limit of the subtracted integrand at t = x
    # include t in [0, xi_0] with u(t) ~ u(xi_0)
    body = np.trapezoid(k, xi, axis=1) + k[:, 0] * xi[0]
    with np.errstate(divide="ignore"):
        pv = u * np.log((L + xi) / (L - xi))
    pv[-1] = u[-1] * np.log(2 * L / (xi[-1] - xi[-2]))  # endpoint: cut the log at one cell
    return (body + pv) / math.pi


def retrieve_ab_from_reflection(data: ScatteringData, M=None):
    """Experimental: A and B from R alone, for m12 = 0 and no bound states.

    |A|^2 = 1/(1 - |R|^2) fixes the modulus; the phase is the Hilbert transform
    of log|A~| - log|A_inf| with A~ = A zeta/(zeta + i) when A has a 1/zeta
    singularity at the origin. The quadrature error (grid halving) is stored
    in ``meta['phase_error']``.
    """
    if data.bound_states:
        raise InsufficientDataError("phase retrieval from R is implemented only without bound states")
    if M is None:
        M = data.meta.get("M")
    if M is None:
        raise InsufficientDataError("phase retrieval needs the transfer matrix (for A at infinity)")
    M = np.asarray(M, dtype=float)
    if M[0, 1] != 0:
        raise InsufficientDataError("phase retrieval is implemented only for m12 = 0")
    a_inf = (M[0, 0] + M[1, 1]) / 2
    xi = data.xi
    logA = -0.5 * np.log1p(-np.abs(data.R) ** 2)
    # decide whether |A| blows up like 1/xi at the origin
    slope = (logA[1] - logA[0]) / (math.log(xi[1]) - math.log(xi[0]))
    singular = slope < -0.5
    u = logA + (np.log(xi) - 0.5 * np.log1p(xi * xi) if singular else 0.0) - math.log(abs(a_inf))

    def phase(xs, us):
        th = _hilbert_even(xs, us)
        if singular:
            th = th + np.arctan2(1.0, xs)
        return th + (math.pi if a_inf < 0 else 0.0)

    theta = phase(xi, u)
    coarse = phase(xi[1::2], u[1::2])
    err = float(np.max(np.abs(coarse - theta[1::2])))
    A = np.exp(logA + 1j * theta)
    B = data.R * A
    meta = dict(data.meta, phase_error=err, experimental=True)
    return ScatteringData(xi, data.R, A, B, data.bound_states, data.S, meta)


# --- file formats ---------------------------------------------------------------


def save_scattering(path, data: ScatteringData):
    path = Path(path)
    cols = [data.xi, data.R.real, data.R.imag]
    header = "xi,Re_R,Im_R"
    if data.has_ab:
        cols += [data.A.real, data.A.imag, data.B.real, data.B.imag]
        header += ",Re_A,Im_A,Re_B,Im_B"
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="", fmt="%.17g")
    side = {"bound_states": list(data.bound_states), "S": data.S}
    if "M" in data.meta:
        side["M"] = data.meta["M"]
    path.with_suffix(".json").write_text(json.dumps(side, indent=2) + "\n")


def load_scattering(path):
    path = Path(path)
    raw = read_csv_columns(path)
    names = raw.keys()
    for c in ("xi", "Re_R", "Im_R"):
        if c not in names:
            raise ConfigurationError(f"{path}: missing column {c}")
    A = B = None
    if {"Re_A", "Im_A", "Re_B", "Im_B"} <= set(names):
        A = raw["Re_A"] + 1j * raw["Im_A"]
        B = raw["Re_B"] + 1j * raw["Im_B"]
    side = {}
    sp = path.with_suffix(".json")
    if sp.exists():
        side = json.loads(sp.read_text())
    meta = {"M": side["M"]} if "M" in side else {}
    return ScatteringData(
        raw["xi"], raw["Re_R"] + 1j * raw["Im_R"], A, B, side.get("bound_states", ()), side.get("S"), meta
    )
