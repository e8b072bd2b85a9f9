"""Roots in z of the field polynomial for small line graphs and the H gadget.

    python3 scripts/probe_roots.py [--mu 2]
"""

import argparse
import itertools

from quasiline_ising.gadgets import build_gadget
from quasiline_ising.graphs import Graph, complete_graph, cycle_graph, line_graph, petersen_graph
from quasiline_ising.spin_models import field_polynomial, univariate_roots_in_z


def petersen_subgraphs(max_edges=12, count=6):
    p = petersen_graph()
    edges = list(p.edges)
    for k, sub in enumerate(itertools.combinations(range(len(edges)), max_edges)):
        if k >= count:
            break
        yield Graph.from_edges(p.n, [edges[i] for i in sub])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mu", default="2")
    args = ap.parse_args()
    corpus = {"L(K4)": line_graph(complete_graph(4)), "L(C6)": line_graph(cycle_graph(6))}
    for i, h in enumerate(petersen_subgraphs()):
        corpus[f"L(P-sub{i})"] = line_graph(h)
    corpus["H gadget"] = build_gadget("H")
    for name, g in corpus.items():
        roots = univariate_roots_in_z(field_polynomial(g), args.mu)
        worst = max(abs(r.value.imag) for r in roots)
        print(f"{name:12s} n={g.n:2d}  max|Im|={worst:.3e}  all real={all(r.is_real for r in roots)}")


if __name__ == "__main__":
    main()
