"""XY-plane POVM on cluster vertices with a prepared ancilla: fidelity and success probability."""

import argparse

import numpy as np

from binomial_mbqc.cavity import CavityModel
from binomial_mbqc.cluster import chain_graph, ideal_cluster, star_graph
from binomial_mbqc.povm import ancilla_state, conditioned_operator, decompose, measure_xy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.99, 0.999])
    ap.add_argument("--t", type=float, nargs="+", default=[np.pi / 3])
    args = ap.parse_args()

    states = {"3-chain": ideal_cluster(chain_graph(3)), "5-star": ideal_cluster(star_graph(5))}
    print(f"{'state':>7} {'beta':>6} {'t':>6} {'vertex':>6} {'F':>7} {'P':>7} {'gap':>9}")
    for beta in args.betas:
        for t in args.t:
            anc = ancilla_state(t, CavityModel(beta_eff=beta))
            gap = decompose(conditioned_operator(anc, 6)).gap_ratio
            for name, psi in states.items():
                for v in range(len(psi.spec.dims)):
                    out = measure_xy(psi, v, t, ancilla=anc)
                    print(f"{name:>7} {beta:6.3f} {t:6.3f} {v:6d} {out.fidelity:7.4f} {out.success_prob:7.4f} {gap:9.1f}")


if __name__ == "__main__":
    main()
