"""The consensus-propagation state machine.

Messages live on directed edges: mu (a mean estimate) and K (a non-negative
confidence weight). A step recomputes, for chosen edges i->j, the outgoing
message from everything node i has heard from neighbors other than j. With
finite attenuation beta the confidences stay bounded by beta*Q and the
iteration converges on any connected graph; with beta=infinity the recursion
is exact on trees (K counts subtree nodes, mu averages them) and diverges on
cycles, so that combination is rejected up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .graphs import EdgeWeights, Graph
from .trace import RunTrace, scaled_norm

__all__ = [
    "ProtocolConfig",
    "MessageState",
    "Schedule",
    "StopRule",
    "update_precisions",
    "update_means",
    "estimates",
    "initial_state",
    "step_sync",
    "step_async",
    "run",
    "regular_fixed_point",
    "observation_weight",
    "scalar_step",
    "mean_update_contraction_factor",
]


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol parameters for one run.

    beta may be math.inf (unattenuated mode, trees only). mu0 defaults to
    y[src] per directed edge; K0 defaults to 0 and may be a scalar or a full
    vector over directed edges.
    """

    beta: float
    weights: EdgeWeights
    y: np.ndarray
    mu0: np.ndarray | None = None
    K0: np.ndarray | float = 0.0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        if not (self.beta > 0):
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass
class MessageState:
    """Messages (mu, K) over directed edges at step t, plus node estimates x.

    x is always exactly the estimate implied by the stored (mu, K).
    """

    t: int
    mu: np.ndarray
    K: np.ndarray
    x: np.ndarray


def _incoming_sums(graph: Graph, K: np.ndarray, mu: np.ndarray | None = None):
    """Per-node sums over incoming directed edges: total K and, optionally,
    total K*mu."""
    total_K = np.bincount(graph.dst, weights=K, minlength=graph.n)
    if mu is None:
        return total_K
    total_Kmu = np.bincount(graph.dst, weights=K * mu, minlength=graph.n)
    return total_K, total_Kmu


def update_precisions(graph: Graph, config: ProtocolConfig, K: np.ndarray) -> np.ndarray:
    """New confidence K'_ij for every directed edge, from the current K.

    K'_ij aggregates the confidences node i received from neighbors other
    than j (plus one for its own observation) and, for finite beta, attenuates
    the result to stay strictly inside (0, beta*Q_ij).
    """
    total_K = _incoming_sums(graph, K)
    S = 1.0 + total_K[graph.src] - K[graph.reverse]
    if math.isinf(config.beta):
        return S
    bq = config.beta * config.weights.per_directed_edge(graph)
    return S / (1.0 + S / bq)


def update_means(
    graph: Graph, config: ProtocolConfig, mu: np.ndarray, K: np.ndarray
) -> np.ndarray:
    """New mean mu'_ij for every directed edge: the K-weighted average of
    node i's observation and the means it received from neighbors other
    than j (a convex combination of those values)."""
    total_K, total_Kmu = _incoming_sums(graph, K, mu)
    S = 1.0 + total_K[graph.src] - K[graph.reverse]
    numer = config.y[graph.src] + total_Kmu[graph.src] - K[graph.reverse] * mu[graph.reverse]
    return numer / S


def estimates(graph: Graph, config: ProtocolConfig, mu: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Per-node estimate of the global average given the stored messages."""
    total_K, total_Kmu = _incoming_sums(graph, K, mu)
    return (config.y + total_Kmu) / (1.0 + total_K)


def initial_state(graph: Graph, config: ProtocolConfig) -> MessageState:
    """Validate the config against the graph and build the t=0 state."""
    m = graph.num_directed
    if config.y.shape != (graph.n,):
        raise ValueError(f"y must have shape ({graph.n},), got {config.y.shape}")
    if config.weights.values.shape != (graph.num_undirected,):
        raise ValueError("weights must cover exactly the undirected edge set")
    if math.isinf(config.beta) and not graph.is_tree():
        raise ValueError(
            "beta=inf is only supported on trees: on a cyclic graph the "
            "unattenuated confidences grow without bound (use finite beta)"
        )
    K0 = np.asarray(config.K0, dtype=np.float64)
    if K0.ndim == 0:
        K0 = np.full(m, float(K0))
    if K0.shape != (m,):
        raise ValueError(f"K0 must be scalar or shape ({m},), got {K0.shape}")
    if np.any(K0 < 0):
        raise ValueError("K0 must be non-negative")
    if config.mu0 is None:
        mu0 = config.y[graph.src].copy()
    else:
        mu0 = np.asarray(config.mu0, dtype=np.float64).copy()
        if mu0.shape != (m,):
            raise ValueError(f"mu0 must have shape ({m},), got {mu0.shape}")
    x0 = estimates(graph, config, mu0, K0)
    return MessageState(t=0, mu=mu0, K=K0, x=x0)


def step_sync(graph: Graph, config: ProtocolConfig, state: MessageState) -> MessageState:
    """Update every directed edge simultaneously from the previous state."""
    K_new = update_precisions(graph, config, state.K)
    mu_new = update_means(graph, config, state.mu, state.K)
    x_new = estimates(graph, config, mu_new, K_new)
    return MessageState(t=state.t + 1, mu=mu_new, K=K_new, x=x_new)


def step_async(
    graph: Graph, config: ProtocolConfig, state: MessageState, edges: np.ndarray
) -> MessageState:
    """Update only the directed edges in `edges`; all others are copied
    verbatim. Node estimates are recomputed from the resulting messages."""
    edges = np.asarray(edges, dtype=np.int64)
    K_new = state.K.copy()
    mu_new = state.mu.copy()
    if edges.size:
        total_K, total_Kmu = _incoming_sums(graph, state.K, state.mu)
        rev = graph.reverse[edges]
        S = 1.0 + total_K[graph.src[edges]] - state.K[rev]
        numer = (
            config.y[graph.src[edges]] + total_Kmu[graph.src[edges]] - state.K[rev] * state.mu[rev]
        )
        mu_new[edges] = numer / S
        if math.isinf(config.beta):
            K_new[edges] = S
        else:
            bq = config.beta * config.weights.per_directed_edge(graph)[edges]
            K_new[edges] = S / (1.0 + S / bq)
    x_new = estimates(graph, config, mu_new, K_new)
    return MessageState(t=state.t + 1, mu=mu_new, K=K_new, x=x_new)


@dataclass
class Schedule:
    """Generator of the directed-edge sets updated at each step.

    Kinds: "synchronous" (all edges every step), "round-robin" (one edge per
    step in index order), "random-subset" (each edge independently with
    probability p per step), "explicit" (replay a fixed list of edge sets,
    cycled). All kinds visit every directed edge infinitely often, which is
    what asynchronous convergence requires.
    """

    kind: str = "synchronous"
    seed: int | None = None
    p: float | None = None
    edge_sets: list[np.ndarray] | None = field(default=None, repr=False)

    _KINDS = ("synchronous", "round-robin", "random-subset", "explicit")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "random-subset":
            if self.p is None or not (0.0 < self.p <= 1.0):
                raise ValueError("random-subset needs inclusion probability p in (0, 1]")
            if self.seed is None:
                raise ValueError("random-subset needs an explicit seed")
        if self.kind == "explicit" and not self.edge_sets:
            raise ValueError("explicit schedule needs a non-empty list of edge sets")

    @classmethod
    def synchronous(cls) -> "Schedule":
        return cls(kind="synchronous")

    @classmethod
    def round_robin(cls) -> "Schedule":
        return cls(kind="round-robin")

    @classmethod
    def random_subset(cls, p: float, seed: int) -> "Schedule":
        return cls(kind="random-subset", p=p, seed=seed)

    @classmethod
    def explicit(cls, edge_sets: list) -> "Schedule":
        sets = [np.asarray(s, dtype=np.int64) for s in edge_sets]
        return cls(kind="explicit", edge_sets=sets)

    @classmethod
    def from_file(cls, path: str | Path) -> "Schedule":
        """One step per line: whitespace-separated directed-edge indices
        (empty line = empty communication set)."""
        sets = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if line.startswith("#"):
                continue
            sets.append(np.asarray([int(v) for v in line.split()], dtype=np.int64))
        return cls.explicit(sets)

    def to_file(self, path: str | Path) -> None:
        if self.kind != "explicit":
            raise ValueError("only explicit schedules can be saved")
        lines = [" ".join(str(int(e)) for e in s) for s in self.edge_sets]
        Path(path).write_text("\n".join(lines) + "\n")

    def sets(self, graph: Graph) -> Iterator[np.ndarray | None]:
        """Infinite iterator of edge-index arrays; None means "all edges"."""
        m = graph.num_directed
        if self.kind == "synchronous":
            while True:
                yield None
        elif self.kind == "round-robin":
            e = 0
            while True:
                yield np.asarray([e], dtype=np.int64)
                e = (e + 1) % m
        elif self.kind == "random-subset":
            rng = np.random.default_rng(self.seed)
            while True:
                yield np.nonzero(rng.random(m) < self.p)[0]
        else:  # explicit, cycled
            for s in self.edge_sets:
                if s.size and (s.min() < 0 or s.max() >= m):
                    raise ValueError(f"edge index out of range in explicit schedule: {s}")
            k = 0
            while True:
                yield self.edge_sets[k]
                k = (k + 1) % len(self.edge_sets)

    def cycle_length(self, graph: Graph) -> int:
        """Steps that constitute one "full pass" for convergence checks."""
        m = graph.num_directed
        if self.kind == "synchronous":
            return 1
        if self.kind == "round-robin":
            return m
        if self.kind == "explicit":
            return len(self.edge_sets)
        # random-subset: coupon-collector window so that every edge was
        # almost surely updated at least once within one check interval
        return int(math.ceil((m / self.p) * math.log(m)))


@dataclass(frozen=True)
class StopRule:
    """Stopping criteria for :func:`run`.

    max_t bounds the step count. eps_mu, when set, stops once neither mu nor K
    moved by more than eps_mu over a full schedule cycle. eps_target, when
    set, stops once ||x - mean(y) 1||_2 / sqrt(n) <= eps_target.
    """

    max_t: int
    eps_mu: float | None = None
    eps_target: float | None = None


def run(
    graph: Graph,
    config: ProtocolConfig,
    schedule: Schedule,
    stop: StopRule,
    stride: int | None = None,
    record_x: bool = False,
) -> RunTrace:
    """Run the protocol under `schedule` until a stop rule fires.

    Returns a trace with the per-step error ||x - mean(y) 1||_2 / sqrt(n) and
    max message deltas. Non-convergence is not an exception: the trace
    carries reason "budget_exhausted".
    """
    state = initial_state(graph, config)
    ybar = float(np.mean(config.y))
    m = graph.num_directed
    if stride is None:
        stride = 1 if m <= 1024 else max(1, math.ceil(stop.max_t / 1000))

    t_hist = np.empty(stop.max_t + 1, dtype=np.int64)
    err_hist = np.empty(stop.max_t + 1)
    dmu_hist = np.zeros(stop.max_t + 1)
    dK_hist = np.zeros(stop.max_t + 1)
    recorded = np.zeros(stop.max_t + 1, dtype=bool)
    x_rows: list[np.ndarray] = []

    def log(k: int, st: MessageState, dmu: float, dK: float) -> None:
        t_hist[k] = st.t
        err_hist[k] = scaled_norm(st.x - ybar)
        dmu_hist[k] = dmu
        dK_hist[k] = dK
        if st.t % stride == 0:
            recorded[k] = True
            if record_x:
                x_rows.append(st.x.copy())

    log(0, state, 0.0, 0.0)
    window = schedule.cycle_length(graph)
    window_delta = 0.0
    reason = "budget_exhausted"
    steps = 0
    edge_iter = schedule.sets(graph)
    for t in range(1, stop.max_t + 1):
        edges = next(edge_iter)
        if edges is None:
            new = step_sync(graph, config, state)
        else:
            new = step_async(graph, config, state, edges)
        dmu = float(np.max(np.abs(new.mu - state.mu))) if m else 0.0
        dK = float(np.max(np.abs(new.K - state.K))) if m else 0.0
        state = new
        steps = t
        log(t, state, dmu, dK)
        window_delta = max(window_delta, dmu, dK)
        if stop.eps_target is not None and err_hist[t] <= stop.eps_target:
            reason = "target_reached"
            break
        if stop.eps_mu is not None and t % window == 0:
            if window_delta < stop.eps_mu:
                reason = "converged"
                break
            window_delta = 0.0

    k = steps + 1
    recorded[steps] = True  # always keep the terminal step
    if record_x and (state.t % stride != 0):
        x_rows.append(state.x.copy())
    return RunTrace(
        t=t_hist[:k].copy(),
        err=err_hist[:k].copy(),
        dmu_max=dmu_hist[:k].copy(),
        dK_max=dK_hist[:k].copy(),
        reason=reason,
        final_t=state.t,
        final_mu=state.mu,
        final_K=state.K,
        final_x=state.x,
        recorded=recorded[:k].copy(),
        x_rows=np.asarray(x_rows) if record_x else None,
    )


def regular_fixed_point(d: int, beta: float) -> float:
    """Common per-edge confidence value at the fixed point on a d-regular
    graph with unit weights.

    Solves the quadratic ((d-1)/beta) k^2 + (2 + 1/beta - d) k - 1 = 0 for its
    unique positive root, using the numerically stable branch.
    """
    if d < 2:
        raise ValueError(f"degree must be >= 2, got {d}")
    if not (0 < beta < math.inf):
        raise ValueError(f"beta must be finite positive, got {beta}")
    a = (d - 1) / beta
    b = 2.0 + 1.0 / beta - d
    disc = math.sqrt(b * b + 4.0 * a)
    if b > 0:
        return 2.0 / (b + disc)
    return (disc - b) / (2.0 * a)


def observation_weight(k: float, d: int) -> float:
    """Weight 1/(1+(d-1)k) of a node's own observation in the mean update on
    a d-regular graph with common confidence k."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return 1.0 / (1.0 + (d - 1) * k)


def scalar_step(k: float, d: int, beta: float) -> float:
    """One step of the scalar recursion that the constant-K subspace of a
    d-regular graph reduces to: k' = (1+(d-1)k) / (1 + (1+(d-1)k)/beta)."""
    s = 1.0 + (d - 1) * k
    return s / (1.0 + s / beta)


def mean_update_contraction_factor(graph: Graph, K: np.ndarray) -> float:
    """Max-norm contraction factor of the mean update at fixed confidences K.

    Updated means are convex combinations with weight sum K/(1 + sum K) on
    incoming means, so the Lipschitz constant in the max norm is the largest
    such share over edges: max_(i,j) (sum_{u in N(i)\\j} K_ui) / (1 + sum).
    Strictly below 1 for finite K, which is what makes the mean iteration
    converge once the confidences have settled.
    """
    total_K = _incoming_sums(graph, K)
    S = 1.0 + total_K[graph.src] - K[graph.reverse]
    return float(np.max((S - 1.0) / S))
