"""Write the problem fixtures and the closed-form oracle spectrum for the jump fixture.

The oracle uses the exact free propagator (cos/sin blocks) and scipy's brentq,
so it shares no code with the library integrator or root finder.
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

OUT = Path(__file__).resolve().parent.parent / "fixtures"
S = math.pi / 2


def write(name, q, M, alpha, beta, n_samples=401):
    x = np.linspace(-S, S, n_samples)
    qs = np.zeros(n_samples) if q is None else q(x)
    d = {"S": S, "q_samples": [float(v) for v in qs], "M": M, "alpha": alpha, "beta": beta}
    (OUT / name).write_text(json.dumps(d, indent=1) + "\n")


def free_delta(lam, M, alpha, beta):
    z = math.sqrt(lam) if lam > 0 else 1e-300
    c, s = math.cos(z * S), math.sin(z * S)
    half = np.array([[c, s / z], [-z * s, c]])
    P = half @ np.array(M, float) @ half
    w = P @ [math.sin(alpha), math.cos(alpha)]
    return w[0] * math.cos(beta) - w[1] * math.sin(beta)


def oracle_spectrum(M, alpha, beta, n, lam_max=400.0, step=1e-3):
    grid = np.arange(step, lam_max, step)
    vals = np.array([free_delta(l, M, alpha, beta) for l in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = [brentq(free_delta, grid[i], grid[i + 1], args=(M, alpha, beta), xtol=1e-14) for i in idx]
    return roots[:n]


def main():
    OUT.mkdir(exist_ok=True)
    h = math.pi / 2
    write("free_dirichlet.json", None, [[1, 0], [0, 1]], 0.0, math.pi, 3)
    write("free_neumann.json", None, [[1, 0], [0, 1]], h, h, 3)
    write("jump_diag2.json", None, [[2, 0], [0, 0.5]], h, math.pi, 3)
    write("shear.json", None, [[1, 1], [0, 1]], 0.0, math.pi, 3)
    write("bump_diag2.json", lambda x: 3 * np.exp(-((x - 0.3) ** 2) / 0.1), [[2, 0], [0, 0.5]], h, math.pi)
    write("symmetric_bump.json", lambda x: 2 * np.exp(-(x**2) / 0.2), [[1, 0], [0, 1]], h, h)
    write("well.json", lambda x: -4 * np.exp(-(x**2) / 0.3), [[1, 0], [0, 1]], h, h)
    roots = oracle_spectrum([[2, 0], [0, 0.5]], h, math.pi, 10)
    lines = ["n,lambda"] + [f"{i},{r:.15g}" for i, r in enumerate(roots)]
    (OUT / "jump_diag2_spectrum.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
