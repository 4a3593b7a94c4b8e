"""Doubling search over the unknown edge-process mixing time.

Running the protocol to a target accuracy requires an attenuation beta that
depends on the mixing time of the directed-edge process, which a distributed
node cannot know. The search runs synchronous phases with guesses 1, 2, 4,
... for the mixing time; each guess fixes (beta, phase length) from the
proven convergence-time bounds, and messages carry over from phase to phase,
so the attenuation only ever tightens (beta grows, and the confidences enter
each phase below the new fixed point).
"""

from __future__ import annotations

import math

import numpy as np

from .engine import ProtocolConfig, initial_state, step_sync
from .graphs import EdgeWeights, Graph
from .trace import RunTrace, scaled_norm

__all__ = ["beta_for", "t_star_for", "t_star_warm_start", "run_adaptive", "phase_table"]


def beta_for(tau_guess: float, epsilon: float, d: int) -> float:
    """Attenuation strong enough that the fixed-point estimates are within
    epsilon/2 of the true mean, assuming the mixing time is tau_guess.

    For d = 2 the known bounds on the fixed-point confidence are suspect, so
    the value is doubled as a safety factor.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if tau_guess < 1:
        raise ValueError(f"tau_guess must be >= 1, got {tau_guess}")
    if d < 2:
        raise ValueError(f"degree must be >= 2, got {d}")
    if d == 2:
        base = max((2.0 * (1.0 + tau_guess) / epsilon - 0.5) ** 2 / 4.0, 9.0 / 16.0)
        return 2.0 * base
    return max(2.0 * (1.0 + tau_guess) / (epsilon * (d - 2)), 3.0 / (d - 2))


def t_star_for(beta: float, tau_guess: float, epsilon: float, d: int) -> int:
    """Synchronous steps sufficient for epsilon-accuracy from zero initial
    confidences, given beta and a mixing-time guess."""
    if d < 2:
        raise ValueError(f"degree must be >= 2, got {d}")
    if d == 2:
        rb = math.sqrt(beta)
        inner = (2.0 + 9.0 * tau_guess * (5.0 + 8.0 * rb) * (0.5 + rb)) / (epsilon / 2.0)
        return int(math.ceil((1.0 + 2.0 * rb) * math.log(inner)))
    inner = (2.0 + 4.0 * tau_guess * (5.0 + 4.0 * (d - 1) * beta)) / (epsilon / 2.0)
    return int(math.ceil((1.0 + (d - 1) * beta) * math.log(inner)))


def t_star_warm_start(beta: float, epsilon: float, d: int) -> int:
    """Steps sufficient for epsilon-accuracy when the confidences start at
    the fixed point (warm start); shorter than the cold-start bound."""
    if d < 2:
        raise ValueError(f"degree must be >= 2, got {d}")
    if d == 2:
        return int(math.ceil((1.0 + 2.0 * math.sqrt(beta)) * math.log(2.0 / epsilon)))
    return int(math.ceil((1.0 + (d - 1) * beta) * math.log(2.0 / epsilon)))


def run_adaptive(
    graph: Graph,
    y: np.ndarray,
    epsilon: float,
    tau_cap: float = 2.0**16,
    max_phases: int = 30,
    stride: int | None = None,
    record_x: bool = False,
) -> RunTrace:
    """Run the doubling search on a regular graph; returns a phase-annotated
    trace.

    Stops after the first phase whose mixing-time guess reaches tau_cap, or
    earlier once two consecutive phase endpoints agree within epsilon/10 in
    the scaled 2-norm (the guess has overtaken the actual mixing time, so
    further doubling no longer moves the estimates).
    """
    d = graph.regular_degree()
    if d is None:
        raise ValueError("the doubling search requires a regular graph")
    if d < 2:
        raise ValueError("the doubling search requires degree >= 2")
    y = np.asarray(y, dtype=np.float64)
    ybar = float(np.mean(y))
    weights = EdgeWeights.uniform(graph)
    m = graph.num_directed

    config0 = ProtocolConfig(beta=1.0, weights=weights, y=y, K0=0.0)
    state = initial_state(graph, config0)

    t_all = [0]
    err_all = [scaled_norm(state.x - ybar)]
    dmu_all = [0.0]
    dK_all = [0.0]
    phase_all = [0]
    x_rows = [state.x.copy()] if record_x else None

    reason = "phase_budget_exhausted"
    prev_end: float | None = None
    for phase in range(max_phases):
        tau_guess = 2.0**phase
        beta = beta_for(tau_guess, epsilon, d)
        t_star = t_star_for(beta, tau_guess, epsilon, d)
        config = ProtocolConfig(beta=beta, weights=weights, y=y)
        for _ in range(t_star):
            new = step_sync(graph, config, state)
            dmu_all.append(float(np.max(np.abs(new.mu - state.mu))) if m else 0.0)
            dK_all.append(float(np.max(np.abs(new.K - state.K))) if m else 0.0)
            state = new
            t_all.append(len(t_all))
            err_all.append(scaled_norm(state.x - ybar))
            phase_all.append(phase)
            if record_x:
                x_rows.append(state.x.copy())
        end_err = err_all[-1]
        if prev_end is not None and abs(end_err - prev_end) < epsilon / 10.0:
            reason = "phase_plateau"
            break
        prev_end = end_err
        if tau_guess >= tau_cap:
            reason = "tau_cap_reached"
            break

    t = np.asarray(t_all, dtype=np.int64)
    if stride is None:
        stride = 1 if m <= 1024 else max(1, math.ceil(t.size / 1000))
    recorded = (t % stride == 0)
    recorded[-1] = True
    return RunTrace(
        t=t,
        err=np.asarray(err_all),
        dmu_max=np.asarray(dmu_all),
        dK_max=np.asarray(dK_all),
        reason=reason,
        final_t=int(t[-1]),
        final_mu=state.mu,
        final_K=state.K,
        final_x=state.x,
        recorded=recorded,
        x_rows=np.asarray(x_rows)[recorded] if record_x else None,
        phase=np.asarray(phase_all, dtype=np.int64),
    )


def phase_table(epsilon: float, d: int, max_phases: int) -> list[dict]:
    """Per-phase (guess, beta, steps) table without running anything."""
    rows = []
    for phase in range(max_phases):
        tau_guess = 2.0**phase
        beta = beta_for(tau_guess, epsilon, d)
        rows.append(
            {
                "phase": phase,
                "tau_guess": tau_guess,
                "beta": beta,
                "t_star": t_star_for(beta, tau_guess, epsilon, d),
            }
        )
    return rows
