"""Forward problem -> scattering data -> Neumann spectra, compared with the direct computation."""

import argparse
import math

import numpy as np

from transfer_sl import (
    NEUMANN_DIRICHLET,
    NEUMANN_NEUMANN,
    ForwardAB,
    eigenvalues,
    load_problem,
    neumann_data_from_scattering,
    reflection,
    spectrum,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("problem", help="problem JSON, e.g. fixtures/bump_diag2.json")
    ap.add_argument("--n", type=int, default=8)
    args = ap.parse_args()

    p, _ = load_problem(args.problem)
    data = reflection(p, np.linspace(0.05, 20.0, 200))
    print(f"S = {p.S:.6g}, bound states eta = {list(data.bound_states)}")
    print(f"max unitarity defect {np.max(data.unitarity_defect()):.2e}, max |R| {np.max(np.abs(data.R)):.4f}")

    nn, nd = neumann_data_from_scattering(ForwardAB(p), p.S, p.M, args.n)
    ref_nn = spectrum(p, NEUMANN_NEUMANN, args.n, norming=True)
    ref_nd = eigenvalues(p, NEUMANN_DIRICHLET, args.n)
    print(f"{'n':>3} {'lam_NN':>14} {'dev':>9} {'a_n':>12} {'dev':>9} {'lam_ND':>14} {'dev':>9}")
    for i in range(args.n):
        print(
            f"{i:3d} {nn.eigenvalues[i]:14.8f} {abs(nn.eigenvalues[i] - ref_nn.eigenvalues[i]):9.1e} "
            f"{nn.norming_constants[i]:12.8f} {abs(nn.norming_constants[i] - ref_nn.norming_constants[i]):9.1e} "
            f"{nd.eigenvalues[i]:14.8f} {abs(nd.eigenvalues[i] - ref_nd.eigenvalues[i]):9.1e}"
        )
    if p.is_free and math.isclose(p.M[0, 1], 0.0):
        print("(q = 0: compare with the closed forms in the README)")


if __name__ == "__main__":
    main()
