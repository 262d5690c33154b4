"""Reconstruction of the m-function from spectral data.

Two routes: a ratio of Hadamard products over two spectra (with the constant
fixed by the large-|lam| behaviour of m), and a Mittag-Leffler pole sum over
one spectrum with its norming constants.

Truncated products and sums are corrected for their tails by fitting
sqrt(lam_n) ~ p n + r over the last few data points and summing the fitted
remainder in closed form (log-gamma for products, digamma for pole sums).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma, polygamma, psi

from .errors import ConfigurationError, ConvergenceError, InsufficientDataError, PoleProximityError

TAIL_FIT_POINTS = 16
DEFAULT_TRUNCATION = 2000
DEFAULT_K0 = 25.0
POLE_TOL = 1e-10


def _strictly_increasing(name, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise InsufficientDataError(f"{name} is empty")
    if not np.all(np.isfinite(x)):
        raise ConfigurationError(f"{name} contains non-finite values")
    if x.size > 1 and not np.all(np.diff(x) > 0):
        raise ConfigurationError(f"{name} must be strictly increasing")
    return x


def _check_angle(name, a):
    a = float(a)
    if not 0.0 <= a < math.pi:
        raise ConfigurationError(f"{name} must lie in [0, pi), got {a}")
    return a


@dataclass(frozen=True)
class SpectralTail:
    """Fitted remainder sqrt(lam_i) ~ p i + r for indices i >= start.

    ``weight`` is the typical residue-like factor of the tail terms (used by
    pole sums); it is 1 for bare products.
    """

    p: float
    r: float
    start: int
    weight: float = 1.0

    @property
    def a(self):
        return self.start + self.r / self.p

    @classmethod
    def fit(cls, values, start, weights=None, npoints=TAIL_FIT_POINTS):
        values = np.asarray(values, dtype=float)
        k = min(npoints, start)
        k -= k % 2  # even count averages out two interleaved families
        if k < 4:
            raise InsufficientDataError(f"need at least 4 values to fit a spectral tail, have {start}")
        idx = np.arange(start - k, start)
        lam = values[idx]
        if np.any(lam <= 0):
            raise InsufficientDataError("tail fit needs positive eigenvalues at the end of the list")
        # Slope from the window endpoints, offset from the window mean: exact for
        # two interleaved families (period-2 offsets), where a least-squares line
        # over the window is biased.
        root = np.sqrt(lam)
        span = k - 2  # even index span keeps the endpoints in phase
        p = (root[-1] - root[-1 - span]) / span
        r = float(np.mean(root - p * idx))
        if p <= 0:
            raise InsufficientDataError("eigenvalue list does not grow; cannot fit a tail")
        g = 1.0 if weights is None else float(np.mean(np.asarray(weights, dtype=float)[idx]))
        return cls(float(p), float(r), int(start), g)

    def _b(self, lam):
        return np.sqrt(-np.asarray(lam, dtype=complex)) / self.p

    def log_product(self, lam):
        """log prod_{i >= start} (1 - lam / (p i + r)^2)."""
        b = self._b(lam)
        a = self.a
        return 2 * loggamma(a) - loggamma(a + 1j * b) - loggamma(a - 1j * b)

    def series(self, lam):
        """sum_{i >= start} 1 / (lam - (p i + r)^2), unweighted."""
        b = self._b(lam)
        a = self.a
        small = np.abs(b) < 1e-6
        bs = np.where(small, 1.0, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            gen = -(psi(a + 1j * bs) - psi(a - 1j * bs)) / (2j * bs * self.p**2)
        return np.where(small, -polygamma(1, a) / self.p**2, gen)

    def inverse_power_sum(self, k):
        """sum_{i >= start} (p i + r)^(-2k)."""
        return float(polygamma(2 * k - 1, self.a) / math.factorial(2 * k - 1) / self.p ** (2 * k))


def _log_product(values, lam):
    """(log|P|, sign or phase) of prod(1 - lam/x_n), zero nodes replaced by lam.

    Real lam: returns (log|P|, sign) with sign tracked by counting negative
    factors. Complex lam: returns (complex log P, 1).
    """
    lam = np.asarray(lam)
    zero = values == 0
    nz = values[~zero]
    if np.iscomplexobj(lam):
        f = 1 - lam[..., None] / nz
        logs = np.sum(np.log(f.astype(complex)), axis=-1)
        if np.any(zero):
            logs = logs + np.count_nonzero(zero) * np.log(lam.astype(complex))
        return logs, 1.0
    lam = lam.astype(float)
    f = 1 - lam[..., None] / nz
    if np.any(zero):
        f = np.concatenate([f, np.repeat(lam[..., None], np.count_nonzero(zero), axis=-1)], axis=-1)
    with np.errstate(divide="ignore"):
        logs = np.sum(np.log(np.abs(f)), axis=-1)
    sign = np.where(np.count_nonzero(f < 0, axis=-1) % 2, -1.0, 1.0)
    sign = np.where(np.any(f == 0, axis=-1), 0.0, sign)
    return logs, sign


def _check_poles(values, lam, what):
    lam_arr = np.atleast_1d(np.asarray(lam))
    scale = np.maximum(1.0, np.abs(values))
    for z in lam_arr:
        d = np.abs(z - values) / scale
        j = int(np.argmin(d))
        if d[j] < POLE_TOL:
            raise PoleProximityError(z, values[j])


@dataclass
class TwoSpectraInput:
    """Spectra for two left angles alpha != alpha' with a common right condition."""

    lambdas: np.ndarray
    mus: np.ndarray
    alpha: float
    alpha_prime: float
    truncation: int | None = None

    def __post_init__(self):
        self.lambdas = _strictly_increasing("lambdas", self.lambdas)
        self.mus = _strictly_increasing("mus", self.mus)
        self.alpha = _check_angle("alpha", self.alpha)
        self.alpha_prime = _check_angle("alpha_prime", self.alpha_prime)
        if self.alpha == self.alpha_prime:
            raise ConfigurationError("alpha and alpha_prime must differ")
        n_avail = min(self.lambdas.size, self.mus.size)
        if self.truncation is None:
            self.truncation = n_avail
        self.truncation = int(self.truncation)
        if not 1 <= self.truncation <= n_avail:
            raise ConfigurationError(f"truncation must lie in [1, {n_avail}], got {self.truncation}")

    @property
    def has_zero(self):
        return bool(np.any(self.lambdas[: self.truncation] == 0) or np.any(self.mus[: self.truncation] == 0))

    def _tails(self):
        N = self.truncation
        return SpectralTail.fit(self.lambdas, N), SpectralTail.fit(self.mus, N)


def hadamard_ratio(inp: TwoSpectraInput, lam, tail=False):
    """prod_{n<N}(1 - lam/mu_n) / prod_{n<N}(1 - lam/lambda_n), in log space.

    ``tail=True`` multiplies in the fitted remainder of both infinite products.
    """
    N = inp.truncation
    lams, mus = inp.lambdas[:N], inp.mus[:N]
    _check_poles(lams, lam, "lambdas")
    lam_arr = np.asarray(lam)
    num, s_num = _log_product(mus, lam_arr)
    den, s_den = _log_product(lams, lam_arr)
    log_r = num - den
    if tail:
        tl, tm = inp._tails()
        log_r = log_r + tm.log_product(lam_arr) - tl.log_product(lam_arr)
    r = s_num * s_den * np.exp(log_r)
    if not np.iscomplexobj(lam_arr):
        r = np.real(r)
    return r[()] if lam_arr.ndim == 0 else r


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    error: float
    samples: tuple = field(default=())

    def __float__(self):
        return self.value


def _limit_expression(inp, k, tail):
    lam = -k * k
    ratio = hadamard_ratio(inp, lam, tail=tail)  # prod_mu / prod_lambda
    a, ap = inp.alpha, inp.alpha_prime
    if a == 0:
        return k * math.sin(ap) / ratio  # -i sqrt(lam) = k on lam = -k^2
    if ap == 0:
        return 1.0 / (ratio * k * math.sin(a))
    return math.sin(ap) / math.sin(a) / ratio


def constant_C(inp: TwoSpectraInput, k0=DEFAULT_K0, tail=True, rtol=1e-6):
    """Ratio of Hadamard constants, from the large-|lam| limit of m.

    The limit expression is sampled at lam = -k^2, k = k0, 2k0, 4k0 and
    extrapolated on the model C + a/k + b/k^2. The error estimate is the
    distance to the two-point (C + a/k) extrapolation of the upper pair.
    """
    ks = np.array([k0, 2 * k0, 4 * k0], dtype=float)
    vals = np.array([_limit_expression(inp, k, tail) for k in ks])
    A = np.stack([np.ones(3), 1 / ks, 1 / ks**2], axis=1)
    c3 = float(np.linalg.solve(A, vals)[0])
    c2 = float(2 * vals[2] - vals[1])
    err = abs(c3 - c2)
    d1, d2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
    if d2 > d1 and d2 > rtol * abs(vals[2]):
        raise ConvergenceError(
            f"limit sequence {vals.tolist()} is not settling; increase the truncation N "
            f"(currently {inp.truncation}) or lower k0"
        )
    return ConstantEstimate(c3, err, tuple(vals.tolist()))


def m_from_two_spectra(inp: TwoSpectraInput, lam, C=None, tail=True):
    """m_{alpha,beta}(lam) = cot(alpha-alpha') - C cosec(alpha-alpha') prod_mu/prod_lambda."""
    if C is None:
        C = constant_C(inp, tail=tail).value
    d = inp.alpha - inp.alpha_prime
    r = hadamard_ratio(inp, lam, tail=tail)
    return math.cos(d) / math.sin(d) - float(C) / math.sin(d) * r


@dataclass
class MittagLefflerModel:
    """Poles lam_n with residues 1/a_n.

    For alpha != 0, m tends to cot(alpha) at -infinity, which fixes the
    constant; ``m0`` may still be given to override it. For alpha = 0 the
    constant m(0) must be supplied.
    """

    eigenvalues: np.ndarray
    norming_constants: np.ndarray
    alpha: float
    m0: float | None = None
    truncation: int | None = None
    tail: bool = True

    def __post_init__(self):
        self.eigenvalues = _strictly_increasing("eigenvalues", self.eigenvalues)
        a = np.asarray(self.norming_constants, dtype=float).ravel()
        if a.shape != self.eigenvalues.shape:
            raise ConfigurationError("norming constants must align with eigenvalues")
        if np.any(~np.isfinite(a)) or np.any(a <= 0):
            raise ConfigurationError("norming constants must be positive")
        self.norming_constants = a
        self.alpha = _check_angle("alpha", self.alpha)
        if self.truncation is None:
            self.truncation = self.eigenvalues.size
        if not 1 <= self.truncation <= self.eigenvalues.size:
            raise ConfigurationError(f"truncation must lie in [1, {self.eigenvalues.size}]")
        if self.alpha == 0 and self.m0 is None:
            raise ConfigurationError("alpha = 0 needs the constant m(0) as input")
        if self.alpha == 0 and np.any(self.eigenvalues[: self.truncation] == 0):
            raise ConfigurationError("alpha = 0 expansion about 0 needs 0 off the spectrum")

    @property
    def lam(self):
        return self.eigenvalues[: self.truncation]

    @property
    def a(self):
        return self.norming_constants[: self.truncation]

    def _weights(self):
        """Per-term factor that tends to a constant along the spectrum."""
        if self.alpha == 0:
            return 1.0 / (self.norming_constants * self.eigenvalues)
        return 1.0 / self.norming_constants

    def fitted_tail(self):
        return SpectralTail.fit(self.eigenvalues, self.truncation, self._weights())

    @property
    def expansion_point(self):
        lam0 = float(self.eigenvalues[0])
        return 0.0 if lam0 != 0 else min(lam0, 0.0) - 1.0

    def _sum(self, lam):
        """sum_{n<N} 1/(a_n (lam - lam_n)) plus the fitted tail (alpha != 0 form)."""
        lam = np.asarray(lam)
        s = np.sum(1.0 / (self.a * (lam[..., None] - self.lam)), axis=-1)
        if self.tail:
            t = self.fitted_tail()
            s = s + t.weight * t.series(lam)
        return s

    def value_at_expansion_point(self):
        if self.alpha == 0:
            return float(self.m0)
        if self.m0 is not None and self.expansion_point == 0.0:
            return float(self.m0)
        return float(np.real(math.cos(self.alpha) / math.sin(self.alpha) + self._sum(self.expansion_point)))

    def tail_bound(self, lam):
        """Size of the dropped remainder sum_{n>=N} |lam| / (a_n lam_n^2) (1 + |lam|/dist)."""
        t = self.fitted_tail()
        if self.alpha == 0:
            s = t.weight * t.inverse_power_sum(1)  # 1/(a_n lam_n^2) = w_n / lam_n
        else:
            s = t.weight * t.inverse_power_sum(2)
        lam_top = (t.p * t.start + t.r) ** 2
        lam = np.asarray(lam)
        dist = np.maximum(lam_top - np.real(lam), np.abs(np.imag(lam)))
        dist = np.maximum(dist, 1e-300)
        return s * np.abs(lam) * (1 + np.abs(lam) / dist)


def m_from_norming(model: MittagLefflerModel, lam):
    """Mittag-Leffler reconstruction of m. Returns ``(value, tail_bound)``."""
    lam_arr = np.asarray(lam)
    _check_poles(model.lam, lam_arr, "eigenvalues")
    if model.alpha == 0:
        # m(lam) = m(0) + lam * sum 1/(a_n lam_n (lam - lam_n))
        w = 1.0 / (model.a * model.lam)
        s = np.sum(w / (lam_arr[..., None] - model.lam), axis=-1)
        if model.tail:
            t = model.fitted_tail()
            s = s + t.weight * t.series(lam_arr)
        val = float(model.m0) + lam_arr * s
    else:
        sig = model.expansion_point
        val = model.value_at_expansion_point() + model._sum(lam_arr) - model._sum(np.asarray(sig))
    if not np.iscomplexobj(lam_arr):
        val = np.real(val)
    bound = model.tail_bound(lam_arr)
    if lam_arr.ndim == 0:
        return val[()], float(bound)
    return val, bound


def m_prime_at_zero(model: MittagLefflerModel):
    """m'(0) = -sum 1/(a_n lam_n^2). Returns ``(value, tail_estimate)``.

    With ``model.tail`` the fitted remainder is included in the value; the
    tail estimate is its magnitude either way.
    """
    lam, a = model.lam, model.a
    if np.any(lam == 0):
        raise ConfigurationError("m'(0) via the pole sum needs 0 off the spectrum")
    partial = -float(np.sum(1.0 / (a * lam * lam)))
    t = model.fitted_tail()
    if model.alpha == 0:
        rem = t.weight * t.inverse_power_sum(1)
    else:
        rem = t.weight * t.inverse_power_sum(2)
    value = partial - rem if model.tail else partial
    return value, rem


def m0_from_asymptotic_constant(eigenvalues, norming_constants, C, truncation=None, k0=DEFAULT_K0):
    """Conditional m_{0,beta}(0) = lim (-i sqrt(lam) - lam sum 1/(a_n lam_n (lam - lam_n))) + C.

    ``C`` is the O(1) constant in m_{0,beta}(lam) = -i sqrt(lam) + C + o(1),
    which the caller must know. The limit is taken along lam = -k^2 and
    Richardson-extrapolated like ``constant_C``.
    """
    model = MittagLefflerModel(eigenvalues, norming_constants, 0.0, m0=0.0, truncation=truncation)
    ks = np.array([k0, 2 * k0, 4 * k0], dtype=float)
    vals = []
    for k in ks:
        lam = -k * k
        m_minus_m0, _ = m_from_norming(model, lam)  # lam * sum(...) since m0 = 0
        vals.append(k - float(m_minus_m0))
    vals = np.array(vals)
    A = np.stack([np.ones(3), 1 / ks, 1 / ks**2], axis=1)
    lim = float(np.linalg.solve(A, vals)[0])
    return ConstantEstimate(lim + float(C), float(abs(lim - (2 * vals[2] - vals[1]))), tuple(vals.tolist()))
