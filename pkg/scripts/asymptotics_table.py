"""Print Delta / Delta_leading along lam = -k^2 for all eight asymptotic regimes."""

import math

import numpy as np

from transfer_sl import BoundaryAngles, Problem, delta
from transfer_sl.asymptotics import AsymptoticRegime, delta_leading

KS = (10, 20, 40, 80, 160)


def main():
    q = lambda x: 3 * np.exp(-((x - 0.3) ** 2) / 0.1)  # noqa: E731
    mats = {"m12=0": np.diag([2.0, 0.5]), "m12=1": np.array([[1.0, 1.0], [0.0, 1.0]])}
    print("regime".ljust(34) + "".join(f"k={k:<9d}" for k in KS))
    for label, M in mats.items():
        p = Problem.from_function(math.pi / 2, q, M)
        for alpha in (0.0, 0.7):
            for beta in (math.pi, 1.2):
                angles = BoundaryAngles(alpha, beta)
                reg = AsymptoticRegime.classify(alpha, beta, p.M)
                ratios = [delta(p, angles, -k * k) / delta_leading(p.S, p.M, angles, -k * k).real for k in KS]
                name = f"{label} alpha:{reg.alpha_class} beta:{reg.beta_class}"
                print(name.ljust(34) + "".join(f"{r:<11.6f}" for r in ratios))


if __name__ == "__main__":
    main()
