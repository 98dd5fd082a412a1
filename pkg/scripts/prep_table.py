"""Print the preparation table: F1, F2, success probability and rotation angles."""

import argparse

from binomial_mbqc.cavity import CavityModel
from binomial_mbqc.prep import TARGETS, prepare


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.99, 0.999])
    ap.add_argument("--amplitude", choices=["linear", "sqrt"], default="linear")
    args = ap.parse_args()

    print(f"{'target':>6} {'beta':>6} {'F1':>7} {'F2':>7} {'P':>6} {'beta_rot':>9} {'zeta':>7}")
    for beta in args.betas:
        model = CavityModel(beta_eff=beta, amplitude=args.amplitude)
        for name in TARGETS:
            r = prepare(name, model)
            print(f"{name:>6} {beta:6.3f} {r.fidelity_first:7.4f} {r.fidelity:7.4f} {r.success_prob:6.3f} {r.beta_rot:9.3f} {r.zeta:7.3f}")


if __name__ == "__main__":
    main()
