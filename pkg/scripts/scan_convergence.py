"""How the scanned (H) worst ratio moves with the scan budget.

Scans are lower bounds on the true sups; this script reruns the scan for
one lattice symbol at several budgets so the stability of the certificate
can be eyeballed.
"""

import argparse

from normlab.bounds import Box, check_hypothesis_H, derivative_sup_scan
from normlab.lattice import LatticeSpec, example_constants, example_window, gibbs_symbol, lattice_hamiltonian
from normlab.phase import SubsetE


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--potential", default="lorentz")
    args = ap.parse_args()
    spec = LatticeSpec(args.n, args.potential)
    F = gibbs_symbol(lattice_hamiltonian(spec))
    window = example_window(args.n)
    E = SubsetE(tuple(range(1, args.n + 1)))
    print("budget,sobol,refine,total_sup,worst_ratio")
    for budget, sobol, refine in [(5_000, 0, False), (50_000, 1024, False), (200_000, 8192, False), (200_000, 8192, True)]:
        scan = derivative_sup_scan(F, E, window, budget=budget, sobol_points=sobol, refine=refine)
        chk = check_hypothesis_H(F, example_constants(spec), window, scan=scan)
        print(f"{budget},{sobol},{refine},{scan.total():.9g},{chk.worst_ratio:.6f}")


if __name__ == "__main__":
    main()
