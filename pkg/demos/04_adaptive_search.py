#!/usr/bin/env python3
"""Choosing the attenuation without knowing the graph: doubling search.

The right beta depends on the edge-process mixing time, which no node knows.
The doubling search guesses 1, 2, 4, ... for it; each guess fixes beta and a
phase length from the proven bounds, and the running messages carry over, so
wrong early guesses cost little. Once the guess passes the true mixing time
the endpoint is within the target accuracy.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import conprop as cp
from conprop.adaptive import phase_table

g = cp.generate_random_regular(30, 3, seed=12)
proc = cp.edge_process(g)
tau_true = cp.cesaro_mixing_time(proc.p_hat, proc.p_star).tau_star
print(f"random 3-regular graph, n={g.n}; true edge-process mixing time {tau_true:.3f}")

epsilon = 0.05
print(f"\nphase plan for target accuracy {epsilon}:")
print(" phase  guess      beta    steps")
for row in phase_table(epsilon, 3, 5):
    print(
        f" {row['phase']:5d}  {row['tau_guess']:5.0f}  {row['beta']:8.1f}  {row['t_star']:7d}"
    )

y = np.random.default_rng(3).random(g.n)
trace = cp.run_adaptive(g, y, epsilon, tau_cap=16)
print(f"\nrun finished after {trace.final_t} steps ({trace.reason})")
print(f"final error {trace.final_err:.5f} <= {epsilon}")

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig, ax = plt.subplots(figsize=(7, 4.5))
ax.semilogy(trace.t, trace.err, lw=1.2)
for phase in range(int(trace.phase[-1]) + 1):
    start = int(np.nonzero(trace.phase == phase)[0][0])
    ax.axvline(trace.t[start], color="gray", lw=0.6, ls="--")
    ax.text(trace.t[start], ax.get_ylim()[1] * 0.5, f" guess {2**phase}", fontsize=8)
ax.axhline(epsilon, color="r", ls=":", label=f"target {epsilon}")
ax.set_xlabel("step")
ax.set_ylabel("error to the true mean")
ax.legend()
fig.tight_layout()
fig.savefig(out / "adaptive_phases.png", dpi=120)
print(f"wrote {out / 'adaptive_phases.png'}")
