"""Fixed-step integration of -y'' + q y = lam y with the point transfer jump at x=0.

Each step of length h is the fourth-order Magnus map exp(Omega_j) with Omega_j
built from the potential at the two Gauss nodes of the step. Omega_j is
traceless, so every step matrix has determinant exactly one and the Wronskian
is conserved up to rounding. For q=0 the step is the exact free propagator.

Two evaluation modes share the same step matrices:
- endpoint propagators for whole arrays of lam (pairwise tree product);
- full trajectories for a single lam (parallel prefix product).
Both use a fixed reduction order, so results are bit-stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, PropagationOverflowError
from .problem import StateMatrix

_SQRT3_12 = np.sqrt(3.0) / 12.0
_CHUNK = 2_000_000  # max lam*steps entries processed at once
# entries that come out of a few thousand step products carry several ulps each,
# so the determinant rounding floor is taken as 16 eps times the entry products
_FLOOR_ULPS = 16


def _cosh_sinhc(s2):
    """cosh(sqrt(s2)) and sinh(sqrt(s2))/sqrt(s2); both even in the root."""
    small = np.abs(s2) < 1e-8
    if np.isrealobj(s2):
        r = np.sqrt(np.abs(s2))
        pos = s2 >= 0
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            C = np.where(pos, np.cosh(r), np.cos(r))
            Sh = np.where(pos, np.sinh(r), np.sin(r)) / np.where(small, 1.0, r)
    else:
        r = np.sqrt(s2)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            C = np.cosh(r)
            Sh = np.sinh(r) / np.where(small, 1.0, r)
    Sh = np.where(small, 1.0 + s2 / 6.0 + s2 * s2 / 120.0, Sh)
    C = np.where(small, 1.0 + s2 / 2.0 + s2 * s2 / 24.0, C)
    return C, Sh


def step_entries(q_gauss, lam, h):
    """Magnus step matrices for every (lam, step) pair.

    ``q_gauss`` has shape (steps, 2); ``lam`` is 1-d. Returns four arrays of
    shape (len(lam), steps) holding e11, e12, e21, e22.
    """
    lam = lam[:, None]
    q1 = q_gauss[None, :, 0]
    q2 = q_gauss[None, :, 1]
    abar = 0.5 * (q1 + q2) - lam
    d = _SQRT3_12 * h * h * (q1 - q2)
    d = np.broadcast_to(d, abar.shape)
    s2 = d * d + h * h * abar
    C, Sh = _cosh_sinhc(s2)
    e11 = C + Sh * d
    e22 = C - Sh * d
    e12 = Sh * h
    e21 = Sh * (h * abar)
    return e11, e12, e21, e22


def _tree_product(e11, e12, e21, e22):
    """Ordered product E_n ... E_1 along the last axis, by pairwise reduction."""
    while e11.shape[-1] > 1:
        n = e11.shape[-1]
        m = n // 2
        # later step (odd index) times earlier step (even index)
        a11, a12, a21, a22 = (e[..., 1 : 2 * m : 2] for e in (e11, e12, e21, e22))
        b11, b12, b21, b22 = (e[..., 0 : 2 * m : 2] for e in (e11, e12, e21, e22))
        p11 = a11 * b11 + a12 * b21
        p12 = a11 * b12 + a12 * b22
        p21 = a21 * b11 + a22 * b21
        p22 = a21 * b12 + a22 * b22
        if n % 2:
            p11, p12, p21, p22 = (
                np.concatenate([p, e[..., -1:]], axis=-1)
                for p, e in zip((p11, p12, p21, p22), (e11, e12, e21, e22))
            )
        e11, e12, e21, e22 = p11, p12, p21, p22
    return np.stack(
        [np.stack([e11[..., 0], e12[..., 0]], -1), np.stack([e21[..., 0], e22[..., 0]], -1)], -2
    )


def _power_product(e11, e12, e21, e22, n):
    """E^n for a single repeated step (constant potential on a half-interval)."""
    base = _stack_steps(e11[:, 0], e12[:, 0], e21[:, 0], e22[:, 0])
    result = None
    while n:
        if n & 1:
            result = base if result is None else base @ result
        n >>= 1
        if n:
            base = base @ base
    return result


def _side_product(q_gauss, lam, h):
    if np.all(q_gauss == q_gauss[0, 0]):
        return _power_product(*step_entries(q_gauss[:1], lam, h), q_gauss.shape[0])
    return _tree_product(*step_entries(q_gauss, lam, h))


def _as_lambda_array(lam):
    lam = np.atleast_1d(np.asarray(lam))
    if np.iscomplexobj(lam) and not np.any(lam.imag):
        lam = lam.real
    return lam.astype(float) if np.isrealobj(lam) else lam.astype(complex)


def half_propagators(problem, lam):
    """Propagators across [-S, 0] and [0, S] for an array of lam.

    Returns ``(L, R)`` with shape lam.shape + (2, 2). The full map from x=-S to
    x=S is ``R @ M @ L``.
    """
    lam_arr = _as_lambda_array(lam)
    shape = np.shape(lam)
    flat = lam_arr.ravel()
    ql, qr = problem.gauss_q
    h = problem.h
    chunk = max(1, _CHUNK // problem.steps)
    dtype = flat.dtype
    L = np.empty((flat.size, 2, 2), dtype=dtype)
    R = np.empty((flat.size, 2, 2), dtype=dtype)
    for i in range(0, flat.size, chunk):
        part = flat[i : i + chunk]
        L[i : i + chunk] = _side_product(ql, part, h)
        R[i : i + chunk] = _side_product(qr, part, h)
    bad = ~(np.all(np.isfinite(L), axis=(1, 2)) & np.all(np.isfinite(R), axis=(1, 2)))
    if np.any(bad):
        raise PropagationOverflowError(flat[np.argmax(bad)])
    return L.reshape(shape + (2, 2)), R.reshape(shape + (2, 2))


def full_propagator(problem, lam):
    """Fundamental matrix map from x=-S to x=S (transfer jump included)."""
    L, R = half_propagators(problem, lam)
    P = R @ problem.M @ L
    if _observers:
        dev, floor = propagator_unimodularity(P)
        i = int(np.argmax(dev - floor))
        for fn in _observers:
            fn("propagator", float(np.ravel(dev)[i]), float(np.ravel(floor)[i]))
    return P


# Callables fn(kind, drift, floor) notified after every propagation; used by
# the test suite to audit Wronskian conservation across a whole run.
_observers = []


def add_observer(fn):
    _observers.append(fn)


def remove_observer(fn):
    _observers.remove(fn)


def _prefix_products(E):
    """Inclusive ordered prefix products P_j = E_j ... E_0 (Hillis-Steele scan)."""
    P = E.copy()
    off = 1
    n = P.shape[0]
    while off < n:
        P[off:] = P[off:] @ P[:-off]
        off *= 2
    return P


def _stack_steps(e11, e12, e21, e22):
    return np.stack([np.stack([e11, e12], -1), np.stack([e21, e22], -1)], -2)


def _inverse_steps(E):
    inv = np.empty_like(E)
    inv[..., 0, 0] = E[..., 1, 1]
    inv[..., 1, 1] = E[..., 0, 0]
    inv[..., 0, 1] = -E[..., 0, 1]
    inv[..., 1, 0] = -E[..., 1, 0]
    return inv


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on the integrator grid, ascending in x, with x=0 listed twice (0-, 0+)."""

    problem: object
    lam: complex
    x: np.ndarray
    states: np.ndarray  # (K, 2, 2)
    zero_index: int  # index of 0-; 0+ is zero_index + 1
    origin: int = 0  # index of the initial state: 0 (from -S) or -1 (from S)

    @property
    def left(self):
        return self.states[self.zero_index]

    @property
    def right(self):
        return self.states[self.zero_index + 1]

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]

    def column(self, k=0):
        """(value, derivative) arrays of solution column ``k``."""
        return self.states[:, 0, k], self.states[:, 1, k]

    def dets(self):
        s = self.states
        return s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0]

    def state_at(self, x, side=-1):
        """StateMatrix at a node; ``side`` selects 0- or 0+ at the origin."""
        if x == 0:
            i = self.zero_index + (side > 0)
            return StateMatrix(0.0, self.states[i], side)
        i = int(np.argmin(np.abs(self.x - x)))
        return StateMatrix(self.x[i], self.states[i])

    def sample(self, points):
        """States at arbitrary points, by one partial Magnus step from the nearest node to the left.

        At x=0 the 0- state is returned.
        """
        points = np.atleast_1d(np.asarray(points, dtype=float))
        S = self.problem.S
        if np.any(np.abs(points) > S * (1 + 1e-14)):
            raise ConfigurationError("sample points must lie in [-S, S]")
        h = self.problem.h
        out = np.empty((points.size, 2, 2), dtype=self.states.dtype if np.iscomplexobj(self.states) else complex)
        n = self.problem.steps
        for i, p in enumerate(points):
            if p <= 0:
                j = min(int(np.floor((p + S) / h)), n)
                x0 = -S + j * h
                base = self.states[j]
            else:
                j = min(int(np.floor(p / h)), n)
                x0 = j * h
                base = self.states[self.zero_index + 1 + j]
            dx = p - x0
            if dx <= 0:
                out[i] = base
                continue
            c = np.array([0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6])
            xs = x0 + c * dx
            qg = self.problem.q(xs)[None, :]
            E = _stack_steps(*(e[0] for e in step_entries(qg, np.array([self.lam]), dx)))
            out[i] = E[0] @ base
        return out


def propagate(problem, init, lam):
    """Integrate a StateMatrix given at x=-S (rightwards) or x=S (leftwards).

    The jump [y, y'](0+) = M [y, y'](0-) is applied exactly at the origin
    (M^-1 when integrating right to left).
    """
    S = problem.S
    if np.isclose(init.x, -S, rtol=0, atol=1e-12 * S):
        rightward = True
    elif np.isclose(init.x, S, rtol=0, atol=1e-12 * S):
        rightward = False
    else:
        raise ConfigurationError(f"initial state must sit at x=-S or x=S, got x={init.x}")
    Y0 = init.data
    if abs(init.det) == 0:
        raise ConfigurationError("initial state matrix is singular")
    lam_arr = _as_lambda_array(lam)
    if lam_arr.size != 1 or not np.all(np.isfinite(lam_arr)):
        raise ConfigurationError("propagate takes a single finite lambda")
    ql, qr = problem.gauss_q
    h = problem.h
    EL = _stack_steps(*(e[0] for e in step_entries(ql, lam_arr, h)))
    ER = _stack_steps(*(e[0] for e in step_entries(qr, lam_arr, h)))
    n = problem.steps
    dtype = complex if (np.iscomplexobj(EL) or np.any(Y0.imag)) else float
    Y0 = Y0.astype(dtype) if dtype is complex else Y0.real
    states = np.empty((2 * n + 2, 2, 2), dtype=dtype)
    if rightward:
        PL = _prefix_products(EL)
        states[0] = Y0
        states[1 : n + 1] = PL @ Y0
        states[n + 1] = problem.M @ states[n]
        PR = _prefix_products(ER)
        states[n + 2 :] = PR @ states[n + 1]
    else:
        PR = _prefix_products(_inverse_steps(ER[::-1]))
        states[-1] = Y0
        states[n + 1 : -1] = (PR @ Y0)[::-1]
        states[n] = problem.M_inv @ states[n + 1]
        PL = _prefix_products(_inverse_steps(EL[::-1]))
        states[:n] = (PL @ states[n])[::-1]
    if not np.all(np.isfinite(states)):
        raise PropagationOverflowError(lam_arr[0])
    x = np.concatenate([np.linspace(-S, 0.0, n + 1), np.linspace(0.0, S, n + 1)])
    traj = Trajectory(problem, lam_arr[0], x, states, n, 0 if rightward else -1)
    if _observers:
        drift, floor = wronskian_drift(traj)
        for fn in _observers:
            fn("trajectory", drift, floor)
    return traj


def wronskian_drift(traj):
    """Largest determinant drift along a trajectory, relative to the initial determinant.

    Also returns the rounding floor: machine epsilon times the product of the
    column norms over |det|. Where that floor approaches the drift (strongly
    growing solutions, lam << 0) the determinant is not resolvable in float64.
    """
    d = traj.dets()
    ref = d[traj.origin]
    drift = np.max(np.abs(d - ref)) / abs(ref)
    s = traj.states
    norms = np.linalg.norm(s[:, :, 0], axis=1) * np.linalg.norm(s[:, :, 1], axis=1)
    floor = _FLOOR_ULPS * np.finfo(float).eps * np.max(norms) / abs(ref)
    return float(drift), float(floor)


def propagator_unimodularity(P):
    """|det P - 1| for propagators; entries cancel, so also return the rounding floor."""
    det = P[..., 0, 0] * P[..., 1, 1] - P[..., 0, 1] * P[..., 1, 0]
    eps = _FLOOR_ULPS * np.finfo(float).eps
    floor = eps * (np.abs(P[..., 0, 0] * P[..., 1, 1]) + np.abs(P[..., 0, 1] * P[..., 1, 0]))
    return np.abs(det - 1.0), floor
