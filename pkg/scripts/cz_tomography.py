"""CZ process map: max deviation from the ideal Pauli transfer matrix, leakage and a gate fidelity."""

import argparse

import numpy as np

from binomial_mbqc.cavity import CavityModel
from binomial_mbqc.gates import PAULI_LABELS, gate_fidelity_example, process_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[1.0, 0.999, 0.99])
    ap.add_argument("--show-map", action="store_true", help="print the 16x16 matrix")
    args = ap.parse_args()

    for beta in args.betas:
        m = CavityModel(beta_eff=beta)
        raw = process_map(m)
        ren = process_map(m, renormalize=True)
        f = gate_fidelity_example(m)
        print(f"beta={beta}: delta={raw.delta:.4f} (renormalized {ren.delta:.4f}) "
              f"max leakage={max(raw.leakage):.4f} psi1psi2 fidelity={f:.4f}")
        if args.show_map:
            with np.printoptions(precision=3, suppress=True, linewidth=200):
                print("      " + " ".join(f"{l:>6}" for l in PAULI_LABELS))
                for l, row in zip(PAULI_LABELS, raw.matrix):
                    print(f"{l:>5} " + " ".join(f"{x:6.3f}" for x in row))


if __name__ == "__main__":
    main()
