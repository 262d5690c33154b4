"""Leading-order large-|lambda| behaviour of v_beta, Delta and m.

The closed forms below are the classical leading terms for the transfer
problem with q=0 asymptotics. They are published for a terminal solution
normalised with the opposite overall sign (v(S) = -sin(beta) for interior
beta, and v'(S) = +1 in the Dirichlet case). Every function here returns
values in this package's convention, v(S) = sin(beta), v'(S) = cos(beta),
which amounts to one global sign flip of v and Delta. m is unaffected.

The Delta closed forms are accurate along lam -> -infinity, which is where
they are used (lower spectral bounds, test tolerances). On the positive real
axis some of them differ from the true leading term by O(1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .problem import BoundaryAngles


@dataclass(frozen=True)
class AsymptoticRegime:
    alpha_class: str  # "zero" | "nonzero"
    beta_class: str  # "pi" | "interior"
    m12_class: str  # "zero" | "nonzero"

    @classmethod
    def classify(cls, alpha, beta, M):
        M = np.asarray(M, dtype=float)
        return cls(
            "zero" if alpha == 0 else "nonzero",
            "pi" if beta in (0.0, math.pi) else "interior",
            "zero" if M[0, 1] == 0 else "nonzero",
        )


def _zeta(lam):
    return np.sqrt(np.asarray(lam, dtype=complex))


def v_leading(S, M, beta, x, lam, printed=False):
    """Leading (value, derivative) of v_beta(x, lam) for large |lam|.

    beta=0 is outside BoundaryAngles and only served as the Dirichlet formula
    set (with v'(S)=1), with a warning; beta=pi uses the same set with v'(S)=-1.
    ``printed=True`` returns the published normalisation instead.
    """
    M = np.asarray(M, dtype=float)
    m11, m12, m22 = M[0, 0], M[0, 1], M[1, 1]
    z = _zeta(lam)
    lam = z * z
    x = float(x)
    if beta == 0.0:
        warnings.warn("beta=0 lies outside (0, pi]; using the Dirichlet formula set", stacklevel=2)
        sign = 1.0
    else:
        sign = -1.0
    if printed:
        sign = 1.0
    sb = math.sin(beta)
    if beta in (0.0, math.pi):
        if x >= 0:
            v = -np.sin(z * (S - x)) / z
            dv = np.cos(z * (S - x))
        elif m12 != 0:
            v = -m12 * np.cos(z * S) * np.cos(z * x)
            dv = m12 * z * np.cos(z * S) * np.sin(z * x)
        else:
            v = -m22 * np.sin(z * S) / z * np.cos(z * x) + m11 * np.sin(z * x) / z * np.cos(z * S)
            dv = m22 * np.sin(z * S) * np.sin(z * x) + m11 * np.cos(z * S) * np.cos(z * x)
    else:
        if x >= 0:
            v = -sb * np.cos(z * (S - x))
            dv = -z * sb * np.sin(z * (S - x))
        elif m12 != 0:
            v = z * m12 * sb * np.cos(z * x) * np.sin(z * S)
            dv = -lam * m12 * sb * np.sin(z * x) * np.sin(z * S)
        else:
            v = -m22 * sb * np.cos(z * x) * np.cos(z * S) - m11 * sb * np.sin(z * x) * np.sin(z * S)
            dv = m22 * z * sb * np.sin(z * x) * np.cos(z * S) - m11 * z * sb * np.cos(z * x) * np.sin(z * S)
    return sign * v, sign * dv


def delta_leading(S, M, angles, lam, printed=False):
    """Leading term of Delta_{alpha,beta}(lam), selected by AsymptoticRegime."""
    M = np.asarray(M, dtype=float)
    m11, m12, m22 = M[0, 0], M[0, 1], M[1, 1]
    alpha, beta = angles.alpha, angles.beta
    reg = AsymptoticRegime.classify(alpha, beta, M)
    z = _zeta(lam)
    lam = z * z
    sa, sb = math.sin(alpha), math.sin(beta)
    sS, cS = np.sin(z * S), np.cos(z * S)
    tr = m11 + m22
    key = (reg.alpha_class, reg.beta_class, reg.m12_class)
    if key == ("nonzero", "interior", "zero"):
        d = -sa * sb * z * tr * np.sin(2 * z * S) / 2
    elif key == ("nonzero", "pi", "zero"):
        d = -sa * tr * sS * sS
    elif key == ("zero", "pi", "zero"):
        d = tr * sS / z * cS
    elif key == ("zero", "interior", "zero"):
        d = m22 * sb * cS * cS - m11 * sb * sS * sS
    elif key == ("nonzero", "interior", "nonzero"):
        d = lam * sa * sb * m12 * sS * sS
    elif key == ("nonzero", "pi", "nonzero"):
        d = -sa * m12 * z * cS * sS
    elif key == ("zero", "pi", "nonzero"):
        d = m12 * cS * cS
    else:  # ("zero", "interior", "nonzero")
        d = -m12 * z * sb * cS * sS
    return d if printed else -d


def free_delta(S, M, angles, lam):
    """Exact Delta_{alpha,beta} for q = 0 and the same jump M (plane-wave half maps)."""
    z = _zeta(lam)
    lam = z * z
    c, s = np.cos(z * S), np.sin(z * S)
    sinc = np.where(z == 0, S, s / np.where(z == 0, 1, z))
    F = np.stack([np.stack([c, sinc], -1), np.stack([-lam * sinc, c], -1)], -2)
    P = F @ np.asarray(M, dtype=float) @ F
    sa, ca = math.sin(angles.alpha), math.cos(angles.alpha)
    w = P[..., 0, 0] * sa + P[..., 0, 1] * ca
    dw = P[..., 1, 0] * sa + P[..., 1, 1] * ca
    return w * math.cos(angles.beta) - dw * math.sin(angles.beta)


def delta_error_envelope(S, M, angles, lam):
    """Magnitude of the neglected remainder in delta_leading (constant factor omitted)."""
    reg = AsymptoticRegime.classify(angles.alpha, angles.beta, M)
    z = np.abs(_zeta(lam))
    e = np.exp(2 * S * np.abs(_zeta(lam).imag))
    factors = {
        ("nonzero", "interior", "zero"): 1.0,
        ("nonzero", "pi", "zero"): 1 / z,
        ("zero", "pi", "zero"): 1 / z**2,
        ("zero", "interior", "zero"): 1 / z,
        ("nonzero", "interior", "nonzero"): z,
        ("nonzero", "pi", "nonzero"): 1.0,
        ("zero", "pi", "nonzero"): 1 / z,
        ("zero", "interior", "nonzero"): 1.0,
    }
    return factors[(reg.alpha_class, reg.beta_class, reg.m12_class)] * e


def m_asymptote(angles_or_alpha, lam):
    """-i sqrt(lam) when alpha = 0, cot(alpha) otherwise."""
    alpha = angles_or_alpha.alpha if isinstance(angles_or_alpha, BoundaryAngles) else float(angles_or_alpha)
    if alpha == 0:
        return -1j * _zeta(lam)
    return complex(math.cos(alpha) / math.sin(alpha))


def expected_zero_count(S, lam):
    """Asymptotic number of eigenvalues below lam: 2 S sqrt(lam) / pi (up to O(1))."""
    return 2 * S * math.sqrt(max(lam, 0.0)) / math.pi


def zero_spacing(S, lam):
    """Asymptotic gap between consecutive eigenvalues near lam (in lambda units)."""
    return max(math.pi * math.sqrt(max(abs(lam), 0.0)) / S, (math.pi / (2 * S)) ** 2)
