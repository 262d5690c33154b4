"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
Every CSV starts with ``# config:`` and ``# config_hash:`` comment lines.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, inverse, scattering, spectral
from .errors import ConfigurationError, InsufficientDataError, TransferSLError
from .problem import BoundaryAngles, load_problem
from .tables import read_csv_columns

log = logging.getLogger("transfer_sl")

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    problem: str | None = None
    alpha: float | None = None
    beta: float | None = None
    n_max: int | None = None
    truncation: int | None = None
    steps: int | None = None
    grid: list | None = None
    out: str | None = None
    tolerance: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if not np.all(np.isfinite(g)):
                raise UsageError("--grid values must be finite")
            self.grid = sorted(float(v) for v in g)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @property
    def hash(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def parse_grid(text):
    """``a,b,c`` or ``lo:hi:n`` (linspace). Use ``--grid=-1,-2`` for negative values."""
    if text is None:
        return None
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return np.linspace(float(lo), float(hi), int(n)).tolist()
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from exc


def _emit(cfg, header, rows, fmt="%.17g"):
    buf = io.StringIO()
    buf.write(f"# config: {cfg.to_json()}\n# config_hash: {cfg.hash}\n")
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(fmt % v if isinstance(v, float) else str(v) for v in row) + "\n")
    text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _problem_and_angles(cfg, need_angles=True):
    if not cfg.problem:
        raise UsageError("--problem is required")
    problem, angles = load_problem(cfg.problem, steps=cfg.steps)
    alpha = cfg.alpha if cfg.alpha is not None else (angles.alpha if angles else None)
    beta = cfg.beta if cfg.beta is not None else (angles.beta if angles else None)
    if need_angles and (alpha is None or beta is None):
        raise UsageError("boundary angles missing: give --alpha/--beta or put them in the problem file")
    cfg.alpha, cfg.beta = alpha, beta  # echo the resolved values
    return problem, (BoundaryAngles(alpha, beta) if need_angles else None)


def read_spectra(path):
    """Spectra CSV with columns n, lambda and optionally a_n."""
    cols = read_csv_columns(path)
    if "lambda" not in cols:
        raise ConfigurationError(f"{path}: missing column 'lambda'")
    a = cols.get("a_n")
    if a is not None and np.any(np.isnan(a)):
        a = None
    return cols["lambda"], a


# --- subcommands ---------------------------------------------------------------


def cmd_forward_spectrum(cfg):
    problem, angles = _problem_and_angles(cfg)
    n_max = cfg.n_max or 10
    ds = spectral.spectrum(problem, angles, n_max, norming=not cfg.extra.get("no_norming"))
    a = ds.norming_constants
    rows = [(i, float(l), float(a[i]) if a is not None else "") for i, l in enumerate(ds.eigenvalues)]
    _emit(cfg, "n,lambda,a_n", rows)


def cmd_m_eval(cfg):
    problem, angles = _problem_and_angles(cfg)
    grid = cfg.grid or [-1.0]
    rows = []
    for lam in grid:
        m = complex(spectral.m_function(problem, angles, lam))
        rows.append((lam, m.real, m.imag, 0.0))
    _emit(cfg, "lambda,m_real,m_imag,tail_bound", rows)


def cmd_invert_two_spectra(cfg):
    lam, _ = read_spectra(cfg.extra["spectra"])
    mu, _ = read_spectra(cfg.extra["spectra_prime"])
    if cfg.alpha is None or cfg.extra.get("alpha_prime") is None:
        raise UsageError("--alpha and --alpha-prime are required")
    inp = inverse.TwoSpectraInput(lam, mu, cfg.alpha, cfg.extra["alpha_prime"], cfg.truncation)
    C = inverse.constant_C(inp)
    log.info("C = %.12g (extrapolation error %.2g)", C.value, C.error)
    rows = []
    for x in cfg.grid or [-1.0]:
        m = complex(inverse.m_from_two_spectra(inp, x, C=C.value))
        rows.append((x, m.real, m.imag, C.error))
    _emit(cfg, "lambda,m_real,m_imag,tail_bound", rows)


def cmd_invert_norming(cfg):
    lam, a = read_spectra(cfg.extra["spectra"])
    if a is None:
        raise InsufficientDataError("norming constants required (column a_n)")
    if cfg.alpha is None:
        raise UsageError("--alpha is required")
    model = inverse.MittagLefflerModel(lam, a, cfg.alpha, m0=cfg.extra.get("m0"), truncation=cfg.truncation)
    rows = []
    for x in cfg.grid or [-1.0]:
        m, bound = inverse.m_from_norming(model, x)
        m = complex(m)
        rows.append((x, m.real, m.imag, float(bound)))
    _emit(cfg, "lambda,m_real,m_imag,tail_bound", rows)


def _xi_grid(cfg):
    grid = cfg.grid or np.linspace(0.05, 20.0, 200).tolist()
    if any(x <= 0 for x in grid):
        raise UsageError("scattering grid must be positive (xi = 0 is excluded)")
    return np.asarray(grid)


def cmd_scatter_forward(cfg):
    problem, _ = _problem_and_angles(cfg, need_angles=False)
    data = scattering.reflection(problem, _xi_grid(cfg))
    defect = float(np.max(data.unitarity_defect()))
    if cfg.out:
        scattering.save_scattering(cfg.out, data)
        # prepend the config lines
        body = Path(cfg.out).read_text()
        Path(cfg.out).write_text(f"# config: {cfg.to_json()}\n# config_hash: {cfg.hash}\n" + body)
    else:
        rows = [
            (float(x), r.real, r.imag, a.real, a.imag, b.real, b.imag)
            for x, r, a, b in zip(data.xi, data.R, data.A, data.B)
        ]
        _emit(cfg, "xi,Re_R,Im_R,Re_A,Im_A,Re_B,Im_B", rows)
    log.info("bound states: %s; max unitarity defect %.2e", list(data.bound_states), defect)
    tol = cfg.tolerance or scattering.UNITARITY_TOL
    if defect > tol:
        log.error("unitarity defect %.3g exceeds %.3g", defect, tol)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_scatter_recover(cfg):
    data = scattering.load_scattering(cfg.extra["data"])
    S = cfg.extra.get("S") or data.S
    alpha = cfg.alpha if cfg.alpha is not None else math.pi / 2
    w1, w2, d1, d2 = scattering.recover_W_at_S(data, alpha, S, phase_retrieval=cfg.extra.get("phase_retrieval"))
    rows = [
        (float(x), *(float(v) for c in (a, b, c_, d) for v in (c.real, c.imag)))
        for x, a, b, c_, d in zip(data.xi, w1, w2, d1, d2)
    ]
    _emit(cfg, "xi,Re_w1,Im_w1,Re_w2,Im_w2,Re_dw1,Im_dw1,Re_dw2,Im_dw2", rows)


def cmd_round_trip(cfg):
    problem, _ = _problem_and_angles(cfg, need_angles=False)
    n_max = cfg.n_max or 8
    n_norm = cfg.extra.get("n_norming") or 5
    nn, nd = scattering.neumann_data_from_scattering(
        scattering.ForwardAB(problem), problem.S, problem.M, n_max, n_norm
    )
    ref_nn = spectral.spectrum(problem, spectral.NEUMANN_NEUMANN, n_max, norming=True)
    ref_nd = spectral.eigenvalues(problem, spectral.NEUMANN_DIRICHLET, n_max)
    d_nn = np.abs(nn.eigenvalues - ref_nn.eigenvalues)
    d_nd = np.abs(nd.eigenvalues - ref_nd.eigenvalues)
    a_ref = ref_nn.norming_constants[:n_norm]
    d_a = np.abs(nn.meta["norming_constants"] - a_ref) / a_ref
    rows = []
    for i in range(n_max):
        rows.append((i, float(nn.eigenvalues[i]), float(d_nn[i]), float(nd.eigenvalues[i]), float(d_nd[i]),
                     float(d_a[i]) if i < n_norm else ""))
    _emit(cfg, "n,lambda_nn,dev_nn,lambda_nd,dev_nd,rel_dev_a_n", rows)
    worst = max(d_nn.max(), d_nd.max(), d_a.max())
    print(f"max spectral deviation {max(d_nn.max(), d_nd.max()):.3e}; "
          f"max norming deviation {d_a.max():.3e}", file=sys.stderr)
    tol = cfg.tolerance or 1e-6
    return EXIT_OK if worst <= tol else EXIT_NUMERIC


def cmd_check_asymptotics(cfg):
    problem, angles = _problem_and_angles(cfg)
    ks = cfg.grid or [10.0, 20.0, 40.0, 80.0]
    rows = []
    for k in ks:
        lam = -k * k
        exact = float(spectral.delta(problem, angles, lam))
        lead = float(np.real(asymptotics.delta_leading(problem.S, problem.M, angles, lam)))
        rows.append((k, exact, lead, exact / lead))
    _emit(cfg, "k,exact,leading,ratio", rows)


COMMANDS = {
    "forward-spectrum": cmd_forward_spectrum,
    "m-eval": cmd_m_eval,
    "invert-two-spectra": cmd_invert_two_spectra,
    "invert-norming": cmd_invert_norming,
    "scatter-forward": cmd_scatter_forward,
    "scatter-recover": cmd_scatter_recover,
    "round-trip": cmd_round_trip,
    "check-asymptotics": cmd_check_asymptotics,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="transfer-sl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, problem=True, angles=True):
        if problem:
            sp.add_argument("--problem", help="problem JSON {S, q_samples, M, alpha, beta}")
            sp.add_argument("--steps", type=int, help="integrator steps per half-interval")
        if angles:
            sp.add_argument("--alpha", type=float)
            sp.add_argument("--beta", type=float)
        sp.add_argument("--grid", help="probe grid: 'a,b,c' or 'lo:hi:n' (write --grid=-1,-2 for negatives)")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--tolerance", type=float)
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    sp = common(sub.add_parser("forward-spectrum", help="eigenvalues and norming constants"))
    sp.add_argument("--n-max", type=int, default=10)
    sp.add_argument("--no-norming", action="store_true")
    common(sub.add_parser("m-eval", help="m-function on a probe grid"))
    sp = common(sub.add_parser("invert-two-spectra", help="m from two spectra"), problem=False)
    sp.add_argument("--spectra", required=True)
    sp.add_argument("--spectra-prime", required=True)
    sp.add_argument("--alpha-prime", type=float)
    sp.add_argument("--truncation", type=int)
    sp = common(sub.add_parser("invert-norming", help="m from one spectrum and norming constants"), problem=False)
    sp.add_argument("--spectra", required=True)
    sp.add_argument("--m0", type=float, help="m(0); required when alpha = 0")
    sp.add_argument("--truncation", type=int)
    common(sub.add_parser("scatter-forward", help="R, A, B on a xi grid"), angles=False)
    sp = common(sub.add_parser("scatter-recover", help="W(S, xi) from scattering data"), problem=False, angles=False)
    sp.add_argument("--data", required=True)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--S", type=float)
    sp.add_argument("--phase-retrieval", action="store_true", help="experimental: rebuild A, B from R alone")
    sp = common(sub.add_parser("round-trip", help="scattering -> Neumann data vs direct"), angles=False)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--n-norming", type=int, default=5)
    common(sub.add_parser("check-asymptotics", help="Delta vs its leading term along lam = -k^2"))
    return p


_CORE = {"subcommand", "problem", "alpha", "beta", "n_max", "truncation", "steps", "grid", "out", "tolerance"}


def config_from_args(ns):
    d = vars(ns).copy()
    d.pop("verbose", None)
    d["grid"] = parse_grid(d.get("grid"))
    core = {k: d.pop(k) for k in list(d) if k in _CORE}
    return RunConfig(**core, extra=d)


def main(argv=None):
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.WARNING)
    try:
        ns = build_parser().parse_args(argv)
        if ns.verbose:
            log.setLevel(logging.INFO)
        cfg = config_from_args(ns)
        rc = COMMANDS[cfg.subcommand](cfg)
        return EXIT_OK if rc is None else rc
    except (UsageError, ConfigurationError, InsufficientDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TransferSLError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
