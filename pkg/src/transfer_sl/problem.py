"""Problem data model: potential, transfer matrix, boundary angles and state containers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError

DEFAULT_STEPS = 2000  # per half-interval

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0


@dataclass(frozen=True, eq=False)
class Problem:
    """Potential samples on [-S, S], transfer matrix at the origin, half-width S.

    ``q_samples`` live on a uniform grid over [-S, S] that must contain x=0 as a
    node, so an odd sample count is required. Each half is interpolated by its
    own cubic spline; q may therefore jump at the origin.

    ``M`` is normalised to unit determinant on construction. ``steps`` is the
    number of fixed integrator steps used on each half-interval.
    """

    S: float
    q_samples: np.ndarray
    M: np.ndarray
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        S = float(self.S)
        if not (S > 0 and math.isfinite(S)):
            raise ConfigurationError(f"half-width S must be positive, got {self.S!r}")
        q = np.asarray(self.q_samples, dtype=float).ravel()
        if q.size < 2:
            raise ConfigurationError("need at least 2 potential samples")
        if not np.all(np.isfinite(q)):
            raise ConfigurationError("potential samples must be finite")
        if q.size % 2 == 0:
            raise ConfigurationError(
                f"potential grid with {q.size} samples does not contain x=0 as a node; "
                "use an odd sample count"
            )
        M = np.asarray(self.M, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(M)):
            raise ConfigurationError("transfer matrix entries must be finite")
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if det <= 0:
            raise ConfigurationError(f"transfer matrix must have positive determinant, got {det}")
        M = M / math.sqrt(det)
        if M[0, 1] == 0 and M[0, 0] + M[1, 1] == 0:
            raise ConfigurationError("m12 and m11 + m22 cannot both vanish")
        steps = int(self.steps)
        if steps < 1000 or steps % 2:
            # h <= 2S/2000 overall; even count keeps composite Simpson usable
            raise ConfigurationError(f"steps per side must be even and >= 1000, got {self.steps}")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "q_samples", q)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "steps", steps)

    @classmethod
    def free(cls, S, M=None, steps=DEFAULT_STEPS, n_samples=3):
        M = np.eye(2) if M is None else M
        return cls(S, np.zeros(n_samples), M, steps)

    @classmethod
    def from_function(cls, S, q, M=None, n_samples=401, steps=DEFAULT_STEPS):
        x = np.linspace(-S, S, n_samples)
        return cls(S, np.asarray(q(x), dtype=float), np.eye(2) if M is None else M, steps)

    @property
    def m11(self):
        return self.M[0, 0]

    @property
    def m12(self):
        return self.M[0, 1]

    @property
    def m21(self):
        return self.M[1, 0]

    @property
    def m22(self):
        return self.M[1, 1]

    @property
    def M_inv(self):
        M = self.M
        return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])

    @property
    def h(self):
        return self.S / self.steps

    @property
    def is_free(self):
        return not np.any(self.q_samples)

    @property
    def x_samples(self):
        return np.linspace(-self.S, self.S, self.q_samples.size)

    @cached_property
    def _splines(self):
        n = self.q_samples.size
        mid = n // 2
        x = self.x_samples
        x[mid] = 0.0
        left = CubicSpline(x[: mid + 1], self.q_samples[: mid + 1])
        right = CubicSpline(x[mid:], self.q_samples[mid:])
        return left, right

    def q(self, x):
        """Interpolated potential; at x=0 the left limit is returned."""
        x = np.asarray(x, dtype=float)
        left, right = self._splines
        return np.where(x <= 0, left(np.minimum(x, 0.0)), right(np.maximum(x, 0.0)))

    @cached_property
    def gauss_q(self):
        """Potential at the two Gauss nodes of every integrator step, per side.

        Returns ``(left, right)``, each of shape (steps, 2), ordered by increasing x.
        """
        h = self.h
        j = np.arange(self.steps)
        c = np.array([0.5 - _GAUSS_OFFSET, 0.5 + _GAUSS_OFFSET])
        xl = -self.S + (j[:, None] + c[None, :]) * h
        xr = (j[:, None] + c[None, :]) * h
        left, right = self._splines
        return left(xl), right(xr)

    def to_dict(self):
        return {"S": self.S, "q_samples": self.q_samples.tolist(), "M": self.M.tolist(), "steps": self.steps}


@dataclass(frozen=True)
class BoundaryAngles:
    """Separated boundary angles: y(-S)cos(alpha) = y'(-S)sin(alpha), same at S with beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha < math.pi:
            raise ConfigurationError(f"alpha must lie in [0, pi), got {self.alpha!r}")
        if not 0.0 < self.beta <= math.pi:
            raise ConfigurationError(f"beta must lie in (0, pi], got {self.beta!r}")

    @property
    def dirichlet_left(self):
        return self.alpha == 0.0

    @property
    def dirichlet_right(self):
        return self.beta == math.pi


def spectral_parameter(lam):
    """Principal square root with Im(zeta) >= 0."""
    zeta = np.sqrt(np.asarray(lam, dtype=complex))
    # lam = x - 0j lands on the lower branch; flip it back
    return np.where(zeta.imag < 0, -zeta, zeta)


@dataclass(frozen=True)
class SpectralParameter:
    lam: complex
    zeta: complex

    @classmethod
    def from_lambda(cls, lam):
        return cls(complex(lam), complex(spectral_parameter(lam)))

    @classmethod
    def from_zeta(cls, zeta):
        zeta = complex(zeta)
        return cls(zeta * zeta, zeta)


@dataclass(frozen=True, eq=False)
class StateMatrix:
    """Two solution columns, each a (value, derivative) pair, at position ``x``.

    ``side`` disambiguates x=0: ``-1`` for 0-, ``+1`` for 0+.
    """

    x: float
    data: np.ndarray
    side: int = 0

    def __post_init__(self):
        object.__setattr__(self, "data", np.asarray(self.data, dtype=complex).reshape(2, 2))

    @property
    def det(self):
        d = self.data
        return d[0, 0] * d[1, 1] - d[0, 1] * d[1, 0]

    @classmethod
    def initial_alpha(cls, S, alpha):
        """H_alpha at x=-S: columns u_alpha = (cos, -sin), w_alpha = (sin, cos)."""
        c, s = math.cos(alpha), math.sin(alpha)
        return cls(-S, np.array([[c, s], [-s, c]]))

    @classmethod
    def terminal_beta(cls, S, beta):
        """v_beta at x=S in column 0, completed to a unimodular-magnitude frame."""
        c, s = math.cos(beta), math.sin(beta)
        return cls(S, np.array([[s, -c], [c, s]]))


@dataclass
class SpectralDataset:
    problem: Problem | None
    angles: BoundaryAngles | None
    eigenvalues: np.ndarray
    norming_constants: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.size > 1 and not np.all(np.diff(ev) > 0):
            raise ConfigurationError("eigenvalues must be strictly increasing")
        self.eigenvalues = ev
        if self.norming_constants is not None:
            a = np.asarray(self.norming_constants, dtype=float)
            if a.shape != ev.shape:
                raise ConfigurationError("norming constants must align with eigenvalues")
            if np.any(a <= 0):
                raise ConfigurationError("norming constants must be positive")
            self.norming_constants = a

    def __len__(self):
        return self.eigenvalues.size


def load_problem(path, steps=None):
    """Read a problem JSON file ``{S, q_samples, M, alpha, beta}``.

    Returns ``(problem, angles)``; angles is None when alpha/beta are absent.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    except OSError as exc:
        raise ConfigurationError(f"cannot read problem file {path}: {exc}") from exc
    missing = {"S", "q_samples", "M"} - raw.keys()
    if missing:
        raise ConfigurationError(f"{path}: missing fields {sorted(missing)}")
    kwargs = {}
    if steps is not None:
        kwargs["steps"] = steps
    elif "steps" in raw:
        kwargs["steps"] = raw["steps"]
    problem = Problem(raw["S"], raw["q_samples"], raw["M"], **kwargs)
    angles = None
    if "alpha" in raw and "beta" in raw:
        angles = BoundaryAngles(float(raw["alpha"]), float(raw["beta"]))
    return problem, angles


def save_problem(path, problem, angles=None):
    d = problem.to_dict()
    if angles is not None:
        d["alpha"] = angles.alpha
        d["beta"] = angles.beta
    Path(path).write_text(json.dumps(d, indent=2) + "\n")
