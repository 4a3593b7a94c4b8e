"""Synchronous pairwise averaging: x <- P x with a doubly stochastic P.

The head-to-head baseline. Convergence is governed by the second eigenvalue
of P, so the node process mixes diffusively (quadratically in distance),
unlike the directed-edge process behind the main protocol.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .graphs import Graph
from .trace import RunTrace, scaled_norm
from .engine import StopRule

__all__ = ["metropolis_matrix", "run_pairwise"]


def metropolis_matrix(graph: Graph, laziness: float = 0.5) -> np.ndarray:
    """Symmetric doubly stochastic averaging matrix respecting the edge set.

    Metropolis weights P_ij = min(1/d_i, 1/d_j) on edges, with the remainder
    on the diagonal, then blended with the identity: (1-laziness) P +
    laziness I. The default laziness 1/2 keeps all eigenvalues non-negative;
    with laziness 0 a bipartite graph has eigenvalue -1 and never mixes.
    """
    if not (0.0 <= laziness < 1.0):
        raise ValueError(f"laziness must be in [0, 1), got {laziness}")
    n = graph.n
    P = np.zeros((n, n))
    for i, j in graph.undirected_edges:
        w = min(1.0 / graph.degrees[i], 1.0 / graph.degrees[j])
        P[i, j] = P[j, i] = w
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    if laziness > 0.0:
        P = (1.0 - laziness) * P + laziness * np.eye(n)
    elif graph.is_bipartite():
        warnings.warn(
            "bipartite graph with laziness 0: the averaging matrix may have "
            "eigenvalue -1 (periodic, no mixing); consider laziness > 0",
            stacklevel=2,
        )
    return P


def run_pairwise(P: np.ndarray, y: np.ndarray, stop: StopRule, stride: int | None = None) -> RunTrace:
    """Iterate x <- P x from x = y, tracing ||x - mean(y) 1||_2 / sqrt(n).

    The trace reuses the engine's CSV schema: dmu_max carries max|Delta x|
    per step and dK_max is zero. Mass (the mean of x) is conserved because P
    is doubly stochastic.
    """
    P = np.asarray(P, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if P.shape != (n, n):
        raise ValueError(f"P must have shape ({n},{n}), got {P.shape}")
    ybar = float(np.mean(y))
    if stride is None:
        stride = 1 if n <= 1024 else max(1, math.ceil(stop.max_t / 1000))

    x = y.copy()
    t_hist = np.empty(stop.max_t + 1, dtype=np.int64)
    err_hist = np.empty(stop.max_t + 1)
    dx_hist = np.zeros(stop.max_t + 1)
    recorded = np.zeros(stop.max_t + 1, dtype=bool)
    t_hist[0] = 0
    err_hist[0] = scaled_norm(x - ybar)
    recorded[0] = True

    reason = "budget_exhausted"
    steps = 0
    if stop.eps_target is not None and err_hist[0] <= stop.eps_target:
        reason = "target_reached"
    else:
        for t in range(1, stop.max_t + 1):
            x_new = P @ x
            dx_hist[t] = float(np.max(np.abs(x_new - x)))
            x = x_new
            t_hist[t] = t
            err_hist[t] = scaled_norm(x - ybar)
            recorded[t] = t % stride == 0
            steps = t
            if stop.eps_target is not None and err_hist[t] <= stop.eps_target:
                reason = "target_reached"
                break
            if stop.eps_mu is not None and dx_hist[t] < stop.eps_mu:
                reason = "converged"
                break
    k = steps + 1
    recorded[steps] = True
    empty = np.zeros(0)
    return RunTrace(
        t=t_hist[:k].copy(),
        err=err_hist[:k].copy(),
        dmu_max=dx_hist[:k].copy(),
        dK_max=np.zeros(k),
        reason=reason,
        final_t=steps,
        final_mu=empty,
        final_K=empty,
        final_x=x,
        recorded=recorded[:k].copy(),
    )
