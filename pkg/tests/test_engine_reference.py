"""Differential check of the vectorized engine against a naive reference.

The reference walks adjacency lists edge by edge and sums with plain Python
floats, sharing no code with the bincount-based implementation. Agreement is
required on random graphs, weights, observations, initial conditions, and
communication sets (tolerances allow for the different summation orders).
"""

import math

import numpy as np

import conprop as cp
from helpers import random_connected_graph


def reference_step(graph, beta, q_dir, y, mu, K, edges):
    """One asynchronous update of `edges`, straight from the definitions."""
    mu_new = mu.copy()
    K_new = K.copy()
    for e in edges:
        i, j = int(graph.src[e]), int(graph.dst[e])
        s = 1.0
        num = float(y[i])
        for u in graph.adjacency[i]:
            if u == j:
                continue
            f = graph.directed_edge_index(u, i)
            s += float(K[f])
            num += float(K[f]) * float(mu[f])
        if math.isinf(beta):
            K_new[e] = s
        else:
            K_new[e] = s / (1.0 + s / (beta * float(q_dir[e])))
        mu_new[e] = num / s
    return mu_new, K_new


def test_async_steps_match_reference():
    rng = np.random.default_rng(99)
    for _ in range(15):
        n = int(rng.integers(4, 15))
        g = random_connected_graph(rng, n)
        m = g.num_directed
        beta = float(rng.uniform(0.5, 30.0))
        weights = cp.EdgeWeights(rng.uniform(0.2, 3.0, g.num_undirected))
        y = rng.normal(size=n)
        cfg = cp.ProtocolConfig(
            beta=beta, weights=weights, y=y, K0=rng.exponential(0.5, m)
        )
        q_dir = weights.per_directed_edge(g)
        state = cp.initial_state(g, cfg)
        mu_ref, K_ref = state.mu.copy(), state.K.copy()
        for _ in range(25):
            edges = np.nonzero(rng.random(m) < 0.4)[0]
            state = cp.step_async(g, cfg, state, edges)
            mu_ref, K_ref = reference_step(g, beta, q_dir, y, mu_ref, K_ref, edges)
            assert np.allclose(state.mu, mu_ref, rtol=0, atol=1e-11)
            assert np.allclose(state.K, K_ref, rtol=0, atol=1e-11)


def test_async_steps_match_reference_unattenuated_tree():
    rng = np.random.default_rng(17)
    g = cp.generate_tree(11, shape="random", seed=3)
    m = g.num_directed
    weights = cp.EdgeWeights.uniform(g)
    y = rng.normal(size=g.n)
    cfg = cp.ProtocolConfig(beta=math.inf, weights=weights, y=y)
    q_dir = weights.per_directed_edge(g)
    state = cp.initial_state(g, cfg)
    mu_ref, K_ref = state.mu.copy(), state.K.copy()
    for _ in range(30):
        edges = np.nonzero(rng.random(m) < 0.5)[0]
        state = cp.step_async(g, cfg, state, edges)
        mu_ref, K_ref = reference_step(g, math.inf, q_dir, y, mu_ref, K_ref, edges)
        assert np.allclose(state.mu, mu_ref, rtol=0, atol=1e-11)
        assert np.allclose(state.K, K_ref, rtol=0, atol=1e-11)


def test_sync_estimates_match_reference():
    rng = np.random.default_rng(7)
    g = random_connected_graph(rng, 12)
    y = rng.random(12)
    cfg = cp.ProtocolConfig(beta=4.0, weights=cp.EdgeWeights.uniform(g), y=y)
    state = cp.initial_state(g, cfg)
    for _ in range(10):
        state = cp.step_sync(g, cfg, state)
    x_ref = np.empty(g.n)
    for i in range(g.n):
        s, num = 1.0, float(y[i])
        for u in g.adjacency[i]:
            f = g.directed_edge_index(u, i)
            s += float(state.K[f])
            num += float(state.K[f]) * float(state.mu[f])
        x_ref[i] = num / s
    assert np.allclose(state.x, x_ref, rtol=0, atol=1e-12)
