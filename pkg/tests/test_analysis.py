import math

import numpy as np
import pytest

import conprop as cp
from conprop.analysis import cesaro_limit, cesaro_mixing_time
from helpers import random_connected_graph


# ----------------------------------------------------------------- laplacian


def test_laplacian_single_edge():
    g = cp.build_graph(2, [(0, 1)])
    L = cp.laplacian(g, cp.EdgeWeights.uniform(g))
    assert np.array_equal(L, np.array([[1.0, -1.0], [-1.0, 1.0]]))


def test_laplacian_unit_weights_is_degree_minus_adjacency():
    g = cp.generate_random_regular(10, 3, seed=2)
    L = cp.laplacian(g, cp.EdgeWeights.uniform(g))
    A = np.zeros((10, 10))
    for i, j in g.undirected_edges:
        A[i, j] = A[j, i] = 1.0
    assert np.array_equal(L, np.diag(A.sum(axis=1)) - A)


def test_laplacian_triangle_eigenvalues():
    g = cp.generate_cycle(3)
    w = np.linalg.eigvalsh(cp.laplacian(g, cp.EdgeWeights.uniform(g)))
    assert w == pytest.approx([0.0, 3.0, 3.0], abs=1e-12)


def test_laplacian_quadratic_form_identity():
    rng = np.random.default_rng(1)
    g = random_connected_graph(rng, 15)
    weights = cp.EdgeWeights(rng.uniform(0.5, 3.0, g.num_undirected))
    L = cp.laplacian(g, weights)
    assert np.max(np.abs(L @ np.ones(g.n))) < 1e-12
    assert np.max(np.abs(L.sum(axis=0))) < 1e-12
    for _ in range(20):
        x = rng.normal(size=g.n)
        direct = sum(
            q * (x[i] - x[j]) ** 2 for (i, j), q in zip(g.undirected_edges, weights.values)
        )
        assert x @ L @ x == pytest.approx(direct, rel=1e-10)


# ---------------------------------------------------------------- solve_mode


def test_solve_mode_identity_limit():
    rng = np.random.default_rng(2)
    g = random_connected_graph(rng, 12)
    y = rng.random(g.n)
    x = cp.solve_mode(g, cp.EdgeWeights.uniform(g), 1e-12, y)
    assert np.max(np.abs(x - y)) < 1e-9


def test_solve_mode_mean_preserved():
    rng = np.random.default_rng(3)
    for _ in range(10):
        g = random_connected_graph(rng, int(rng.integers(5, 30)))
        y = rng.random(g.n)
        for beta in (1.0, 10.0, 100.0):
            x = cp.solve_mode(g, cp.EdgeWeights.uniform(g), beta, y)
            assert abs(float(np.mean(x)) - float(np.mean(y))) < 1e-12


def test_solve_mode_constant_observations():
    g = cp.generate_cycle(7)
    x = cp.solve_mode(g, cp.EdgeWeights.uniform(g), 42.0, np.full(7, 3.25))
    assert x == pytest.approx(np.full(7, 3.25), abs=1e-12)


def test_solve_mode_rejects_bad_beta():
    g = cp.generate_cycle(4)
    with pytest.raises(ValueError):
        cp.solve_mode(g, cp.EdgeWeights.uniform(g), math.inf, np.zeros(4))


# -------------------------------------------------------------- edge process


def test_edge_process_cycle_is_permutation_with_two_orbits():
    g = cp.generate_cycle(4)
    P = cp.edge_process(g).p_hat
    assert np.all(np.isin(P, (0.0, 1.0)))
    assert np.all(P.sum(axis=0) == 1) and np.all(P.sum(axis=1) == 1)
    # orbit through (1,0): follows the messages feeding it, one full lap
    succ = np.argmax(P, axis=1)
    e = g.directed_edge_index(1, 0)
    orbit = {e}
    f = int(succ[e])
    while f != e:
        orbit.add(f)
        f = int(succ[f])
    assert len(orbit) == 4


def test_edge_process_k4_rows():
    g = cp.generate_random_regular(4, 3, seed=0)
    P = cp.edge_process(g).p_hat
    for row in P:
        nz = row[row > 0]
        assert len(nz) == 2 and np.all(nz == 0.5)


def test_edge_process_doubly_stochastic():
    g = cp.generate_torus(2, 3)
    P = cp.edge_process(g).p_hat
    assert np.max(np.abs(P.sum(axis=0) - 1.0)) < 1e-14
    assert np.max(np.abs(P.sum(axis=1) - 1.0)) < 1e-14


def test_edge_process_moves_against_message_flow():
    g = cp.generate_cycle(5)
    P = cp.edge_process(g).p_hat
    for e in range(g.num_directed):
        i, j = int(g.src[e]), int(g.dst[e])
        for f in np.nonzero(P[e])[0]:
            u, v = int(g.src[f]), int(g.dst[f])
            assert v == i and u != j  # an incoming edge of i, not the reverse


def test_edge_process_rejects_irregular():
    g = cp.generate_tree(5, shape="balanced")
    with pytest.raises(ValueError, match="regular"):
        cp.edge_process(g)


def test_averaging_matrix():
    g = cp.generate_cycle(4)
    proc = cp.edge_process(g)
    mu = np.arange(8.0)
    direct = np.zeros(4)
    for j in range(4):
        direct[j] = sum(mu[g.directed_edge_index(i, j)] for i in g.adjacency[j]) / 2
    assert np.array_equal(proc.averaging @ mu, direct)


def test_averaging_contraction():
    # scaled norms: ||A v||_{2,n} <= ||v||_{2,nd}
    rng = np.random.default_rng(4)
    g = cp.generate_random_regular(12, 3, seed=1)
    proc = cp.edge_process(g)
    for _ in range(200):
        v = rng.normal(size=g.num_directed)
        lhs = np.linalg.norm(proc.averaging @ v) / math.sqrt(g.n)
        rhs = np.linalg.norm(v) / math.sqrt(g.num_directed)
        assert lhs <= rhs + 1e-12


# -------------------------------------------------------------- cesaro limit


def test_cesaro_limit_identity():
    assert np.array_equal(cesaro_limit(np.eye(5)), np.eye(5))


def test_cesaro_limit_cycle_orbit_blocks():
    g = cp.generate_cycle(4)
    proc = cp.edge_process(g)
    star = proc.p_star
    # each row: 1/4 on the 4 edges of its orbit, 0 elsewhere
    assert np.all(np.isin(np.round(star, 12), (0.0, 0.25)))
    assert np.max(np.abs(star.sum(axis=1) - 1.0)) < 1e-14
    assert np.max(np.abs(proc.p_hat @ star - star)) < 1e-12


def test_cesaro_limit_aperiodic_uniform():
    g = cp.generate_random_regular(4, 3, seed=0)  # K4 edge chain is irreducible aperiodic
    star = cp.edge_process(g).p_star
    assert np.max(np.abs(star - 1.0 / 12)) < 1e-11


def test_cesaro_limit_identities():
    for g in (cp.generate_torus(2, 4), cp.generate_random_regular(10, 3, seed=3)):
        proc = cp.edge_process(g)
        P, S = proc.p_hat, proc.p_star
        for gap in (P @ S - S, S @ P - S, S @ S - S):
            assert np.max(np.abs(gap)) < 1e-9


def test_cesaro_limit_rejects_non_stochastic():
    with pytest.raises(ValueError):
        cesaro_limit(np.array([[0.5, 0.6], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        cesaro_limit(np.array([[1.5, -0.5], [0.5, 0.5]]))


# ------------------------------------------------------------ cesaro mixing


def test_cycle4_mixing_time_exact():
    g = cp.generate_cycle(4)
    proc = cp.edge_process(g)
    rep = cesaro_mixing_time(proc.p_hat, proc.p_star)
    assert rep.tau_star == pytest.approx(math.sqrt(2), abs=1e-9)
    assert rep.attained_t == 1
    assert rep.tau_star_err == 0.0


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_cycle_mixing_time_dirichlet_oracle(n):
    # partial geometric sums of the rotation eigenvalues peak at the
    # Dirichlet-kernel maximum 1/sin(pi/n)
    g = cp.generate_cycle(n)
    proc = cp.edge_process(g)
    rep = cesaro_mixing_time(proc.p_hat, proc.p_star)
    assert rep.tau_star == pytest.approx(1.0 / math.sin(math.pi / n), abs=1e-9)


def test_trivial_chain_mixing_time_zero():
    rep = cesaro_mixing_time(np.ones((1, 1)), np.ones((1, 1)))
    assert rep.tau_star == 0.0


def test_k4_mixing_time_spectral_value():
    # eigenvalues of the K4 edge chain put the supremum at 1/(1 - 1/2) = 2
    g = cp.generate_random_regular(4, 3, seed=0)
    proc = cp.edge_process(g)
    rep = cesaro_mixing_time(proc.p_hat, proc.p_star)
    assert rep.tau_star == pytest.approx(2.0, abs=1e-8)


def test_periodic_chain_mixing_time_brute_force():
    # even-side torus: bipartite, so the edge chain has period 2
    g = cp.generate_torus(2, 4)
    proc = cp.edge_process(g)
    rep = cesaro_mixing_time(proc.p_hat, proc.p_star)
    S = np.zeros_like(proc.p_hat)
    power = np.eye(proc.p_hat.shape[0])
    brute = 0.0
    for _ in range(300):
        S += power - proc.p_star
        brute = max(brute, float(np.linalg.norm(S, ord=2)))
        power = power @ proc.p_hat
    assert rep.tau_star == pytest.approx(brute, abs=1e-9)
    assert rep.tau_star_err < 1e-8


def test_mixing_time_budget_error():
    g = cp.generate_torus(2, 4)
    proc = cp.edge_process(g)
    with pytest.raises(RuntimeError, match="not certified"):
        cesaro_mixing_time(proc.p_hat, proc.p_star, max_steps=3)


# ----------------------------------------------------------- pairwise mixing


def test_lazy_cycle_mixing_time():
    g = cp.generate_cycle(4)
    rep = cp.pairwise_mixing_time(cp.metropolis_matrix(g, laziness=0.5))
    assert rep.lambda2 == pytest.approx(0.5, abs=1e-12)
    assert rep.tau2 == pytest.approx(1.0 / math.log(2.0), abs=1e-9)


def test_complete_graph_mixes_in_one_step():
    rep = cp.pairwise_mixing_time(np.full((5, 5), 0.2))
    assert rep.lambda2 == pytest.approx(0.0, abs=1e-12)
    assert rep.tau2 == 0.0


def test_lazy_cycle_quadratic_scaling():
    taus = []
    for n in (8, 16, 32):
        g = cp.generate_cycle(n)
        taus.append(cp.pairwise_mixing_time(cp.metropolis_matrix(g, 0.5)).tau2)
    for small, big in zip(taus, taus[1:]):
        assert 3.8 < big / small < 4.3


def test_pairwise_mixing_rejects_disconnected():
    P = np.zeros((4, 4))
    P[:2, :2] = 0.5
    P[2:, 2:] = 0.5
    with pytest.raises(ValueError, match="disconnected"):
        cp.pairwise_mixing_time(P)


def test_pairwise_mixing_warns_on_dominant_negative_eigenvalue():
    g = cp.generate_cycle(4)  # bipartite, laziness 0 puts an eigenvalue at -1
    with pytest.warns(UserWarning, match="bipartite"):
        P = cp.metropolis_matrix(g, laziness=0.0)
    with pytest.warns(UserWarning, match="lazy"):
        rep = cp.pairwise_mixing_time(P)
    assert rep.lambda_min == pytest.approx(-1.0, abs=1e-12)


def test_pairwise_mixing_requires_symmetry():
    P = np.array([[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.25, 0.0, 0.75]])
    with pytest.raises(ValueError, match="symmetric"):
        cp.pairwise_mixing_time(P)


# -------------------------------------------------- engine/analysis bridges


def test_converged_run_matches_mode():
    rng = np.random.default_rng(5)
    g = random_connected_graph(rng, 16)
    y = rng.random(g.n)
    w = cp.EdgeWeights.uniform(g)
    cfg = cp.ProtocolConfig(beta=7.0, weights=w, y=y)
    tr = cp.run(g, cfg, cp.Schedule.synchronous(), cp.StopRule(max_t=20000, eps_mu=1e-13))
    assert tr.reason == "converged"
    assert np.max(np.abs(tr.final_x - cp.solve_mode(g, w, 7.0, y))) < 1e-6


def test_converged_run_matches_mode_with_nonuniform_weights():
    rng = np.random.default_rng(12)
    g = random_connected_graph(rng, 12)
    y = rng.random(g.n)
    w = cp.EdgeWeights(rng.uniform(0.3, 4.0, g.num_undirected))
    cfg = cp.ProtocolConfig(beta=3.0, weights=w, y=y)
    tr = cp.run(g, cfg, cp.Schedule.synchronous(), cp.StopRule(max_t=20000, eps_mu=1e-13))
    assert tr.reason == "converged"
    assert np.max(np.abs(tr.final_x - cp.solve_mode(g, w, 3.0, y))) < 1e-6
    # updated confidences respect the per-edge caps beta * Q
    caps = 3.0 * w.per_directed_edge(g)
    assert np.all(tr.final_K < caps)


def test_sup_error_decreases_along_beta():
    rng = np.random.default_rng(6)
    g = random_connected_graph(rng, 20)
    y = rng.random(g.n)
    w = cp.EdgeWeights.uniform(g)
    sups = [
        float(np.max(np.abs(cp.solve_mode(g, w, b, y) - np.mean(y))))
        for b in (1.0, 10.0, 100.0, 1000.0, 10000.0)
    ]
    assert all(a > b for a, b in zip(sups, sups[1:]))


@pytest.mark.parametrize(
    "g,d", [(cp.generate_cycle(6), 2), (cp.generate_random_regular(12, 3, seed=5), 3)]
)
def test_mean_series_identity(g, d):
    # with confidences held at the fixed point, the mean vector after t steps
    # is the geometric partial series plus its remainder term
    beta = 1.0
    k = cp.regular_fixed_point(d, beta)
    gamma = cp.observation_weight(k, d)
    y = np.random.default_rng(11).random(g.n)
    proc = cp.edge_process(g)
    yhat = y[np.asarray(g.src)]
    cfg = cp.ProtocolConfig(beta=beta, weights=cp.EdgeWeights.uniform(g), y=y, K0=k)
    st = cp.initial_state(g, cfg)
    partial = np.zeros(g.num_directed)
    power = np.eye(g.num_directed)
    for t in range(1, 21):
        st = cp.step_sync(g, cfg, st)
        partial += gamma * (1.0 - gamma) ** (t - 1) * (power @ yhat)
        power = power @ proc.p_hat  # now P^t
        closed = partial + (1.0 - gamma) ** t * (power @ yhat)
        assert np.max(np.abs(st.mu - closed)) < 1e-12
    # far enough out the remainder drops below 1e-10 and the literal
    # truncated series matches on its own
    t_big = int(math.ceil(math.log(1e-11) / math.log(1.0 - gamma)))
    st = cp.initial_state(g, cfg)
    for _ in range(t_big):
        st = cp.step_sync(g, cfg, st)
    truncated = np.zeros(g.num_directed)
    power = np.eye(g.num_directed)
    for tau in range(t_big + 1):
        truncated += gamma * (1.0 - gamma) ** tau * (power @ yhat)
        power = power @ proc.p_hat
    assert np.max(np.abs(st.mu - truncated)) < 1e-10


def test_mixing_report_merged():
    a = cp.MixingReport(tau_star=1.5, attained_t=2)
    b = cp.MixingReport(tau2=3.0, lambda2=0.5)
    c = a.merged(b)
    assert (c.tau_star, c.attained_t, c.tau2, c.lambda2) == (1.5, 2, 3.0, 0.5)
