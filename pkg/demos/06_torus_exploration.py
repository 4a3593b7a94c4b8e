#!/usr/bin/env python3
"""Exploratory: edge-process mixing times on the 2-d torus.

For the cycle the edge-walk mixing time is provably linear in n. How it
scales on higher-dimensional tori is open; this script just tabulates the
exactly computed values for small sides (even sides give a bipartite,
period-2 edge walk, handled by the period-aware scan). Numbers are recorded
for inspection, not asserted.
"""

import math

import conprop as cp

print("2-d torus, side^2 nodes, degree 4")
print(" side    n    tau*    tau*_err      tau2   n^(3/4)")
for side in (3, 4, 5, 6):
    g = cp.generate_torus(2, side)
    proc = cp.edge_process(g)
    rep = cp.cesaro_mixing_time(proc.p_hat, proc.p_star)
    tau2 = cp.pairwise_mixing_time(cp.metropolis_matrix(g, 0.5)).tau2
    print(
        f" {side:4d} {g.n:4d} {rep.tau_star:7.4f} {rep.tau_star_err:10.2e} "
        f"{tau2:9.3f} {g.n ** 0.75:9.3f}"
    )

print("\nsides this small say little about the growth exponent; the table")
print("is a starting point for anyone who wants to push n higher.")
