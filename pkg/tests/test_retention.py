import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import odd_graphs
from majdyn.dynamics import run_sync_until_cycle
from majdyn.errors import InsufficientTrials, InvalidP, MissingData, WNotLargeEnough
from majdyn.graph import complete_graph, gen_random_odd_graph, path_graph, torus_graph, triangle_with_loops
from majdyn.retention import (
    THREE_SIGMA_TAIL,
    Estimator,
    causal_radius,
    check_cesaro_bound,
    check_monotone_learning,
    chernoff_bound,
    empirical_q,
    estimate,
    exact_delta,
    greedy_disjoint_balls,
    monte_carlo_delta,
    retention_bound,
    sample_world,
    select_W,
    sigma,
)


# worlds


def test_sample_world_contract():
    g = torus_graph(5, 5)
    a, b = sample_world(g, 0.8, 3), sample_world(g, 0.8, 3)
    assert a.S == b.S and np.array_equal(a.config0, b.config0)
    w = sample_world(g, 1 - 1e-9, 4)
    assert np.all(w.config0 == w.S)
    for p in (0.5, 1.0, 0.2):
        with pytest.raises(InvalidP):
            sample_world(g, p, 0)


def test_sample_world_frequency():
    p, trials, n = 0.7, 100_000, 4
    hits = np.zeros(n)
    s_plus = 0
    ss = np.random.SeedSequence(99).spawn(trials)
    for s in ss:
        w = sample_world(n, p, s)
        hits += w.config0 == w.S
        s_plus += w.S == 1
    sd = math.sqrt(p * (1 - p) / trials)
    assert np.all(np.abs(hits / trials - p) <= 3 * sd)
    assert abs(s_plus / trials - 0.5) <= 3 * math.sqrt(0.25 / trials)


# vertex sets


def test_select_W_examples():
    g = path_graph(5)
    marks = [0.3, 0.9, 0.1, 0.8, 0.5]
    assert select_W(g, 1, marks=marks) == (0, 2, 4)
    assert select_W(g, 0, marks=marks) == tuple(range(5))
    assert select_W(g, 4, marks=marks) == (2,)


@given(odd_graphs(max_n=30), st.integers(0, 6), st.integers(0, 2**31))
def test_select_W_matches_naive(g, r, seed):
    marks = np.random.default_rng(seed).exponential(size=g.n)
    W = select_W(g, r, marks=marks)
    D = g.distance_matrix
    assert set(W) == oracles.w_naive(D, marks, r)
    assert W and int(np.argmin(marks)) in W
    assert all(D[i, j] > r for i, j in itertools.combinations(W, 2))


def test_greedy_examples():
    assert greedy_disjoint_balls(path_graph(20), 2) == (0, 5, 10, 15)
    assert greedy_disjoint_balls(path_graph(7), 0) == tuple(range(7))
    assert len(greedy_disjoint_balls(torus_graph(5, 5), 4)) == 1


@given(odd_graphs(max_n=30), st.integers(0, 4))
def test_greedy_disjoint_and_maximal(g, radius):
    I = greedy_disjoint_balls(g, radius)
    balls = {i: set(g.ball(i, radius).tolist()) for i in range(g.n)}
    for i, j in itertools.combinations(I, 2):
        assert not balls[i] & balls[j]
    used = set().union(*(balls[i] for i in I))
    for v in range(g.n):
        assert v in I or balls[v] & used


# causal radius


def test_causal_radius_simple():
    assert causal_radius("sync", 3, 0.1).radius == 6
    assert int(causal_radius("sync", 2.5, 0.1)) == 6
    assert causal_radius("async", 0, 0.1).radius == 0


def _oracle_schedule(n, t, rng):
    # each vertex: Poisson(t) rings at uniform times
    counts = rng.poisson(t, n)
    verts = np.repeat(np.arange(n), counts)
    times = rng.random(len(verts)) * t
    return verts[np.argsort(times)].tolist()


@pytest.mark.slow
def test_causal_radius_async_brute_force():
    g = torus_graph(10, 10)
    t, delta = 0.5, 0.05
    res = causal_radius("async", t, delta, g, trials=20_000, seed=1)
    assert res.confident

    rng = np.random.default_rng(2024)
    adj = g.adj_lists
    dist = oracles.bfs_dist(adj, 0)
    radii = []
    for _ in range(100_000):
        cone = oracles.forward_cones(adj, _oracle_schedule(g.n, t, rng))[0]
        radii.append(max(dist[v] for v in cone))
    radii = np.array(radii)
    q = next(q for q in range(20) if np.mean(radii > q) <= delta / 2)
    assert abs(res.radius - 2 * q) <= 1


def test_causal_radius_insufficient():
    g = torus_graph(10, 10)
    with pytest.raises(InsufficientTrials):
        causal_radius("async", 0.5, 0.066, g, trials=300, seed=0)
    res = causal_radius("async", 0.5, 0.066, g, trials=300, seed=0, strict=False)
    assert not res.confident and res.radius % 2 == 0


# estimators


def test_estimate_examples():
    g = triangle_with_loops()
    w = sample_world(g, 0.9, 0)
    w.config0[:] = [1, 1, -1]
    assert estimate(Estimator.initial_majority(), w) == (1, False)
    tr = run_sync_until_cycle(g, w.config0)
    assert estimate(Estimator.limit_majority(), w, tr).value == 1
    assert estimate(Estimator.cone_majority(W=[2], n=1, t=0), w, tr).value == -1
    with pytest.raises(MissingData):
        estimate(Estimator.limit_majority(), w)
    with pytest.raises(WNotLargeEnough):
        estimate(Estimator.cone_majority(W=[2], n=2, t=0), w, tr)


def test_tie_uses_coin():
    g = complete_graph(4)  # degree 3 without loops; two against two ties at the sum
    w = sample_world(g, 0.9, 0)
    w.config0[:] = [1, 1, -1, -1]
    tr = run_sync_until_cycle(g, w.config0)
    e = estimate(Estimator.cone_majority(W=[0, 1, 2, 3], n=4, t=0), w, tr, rng=np.random.default_rng(1))
    assert e.tie and e.value in (-1, 1)


def test_limit_majority_triangle_is_initial_majority():
    g = triangle_with_loops()
    for bits in itertools.product((1, -1), repeat=3):
        z = run_sync_until_cycle(g, bits).final
        assert set(z.tolist()) == {1 if sum(bits) > 0 else -1}


# exact and Monte Carlo error


def test_exact_delta_triangle():
    p = Fraction(9, 10)
    assert exact_delta(triangle_with_loops(), p) == 3 * p * (1 - p) ** 2 + (1 - p) ** 3 == Fraction(7, 250)


@given(odd_graphs(max_n=9), st.sampled_from([Fraction(3, 5), Fraction(3, 4), Fraction(9, 10)]))
def test_exact_delta_matches_oracle(g, p):
    assert exact_delta(g, p) == oracles.exact_error(g.adj_lists, p)
    sub = list(range(0, g.n, 2))
    assert exact_delta(g, p, Estimator.limit_majority(sub)) == oracles.exact_error(g.adj_lists, p, sub)


def test_monte_carlo_triangle():
    res = monte_carlo_delta(triangle_with_loops(), 0.9, trials=100_000, seed=1)
    assert abs(res.error_rate - 0.028) <= 3 * sigma(0.028, res.trials)
    assert res.tie_count == 0


def test_monte_carlo_matches_exact_small_graphs():
    rng = np.random.default_rng(8)
    for k in range(4):
        g = gen_random_odd_graph(int(rng.integers(4, 11)), 3, rng)
        ex = float(exact_delta(g, Fraction(3, 4)))
        mc = monte_carlo_delta(g, 0.75, trials=8000, seed=k)
        assert abs(mc.error_rate - ex) <= 3 * sigma(ex, mc.trials) + 1e-12


def test_monte_carlo_near_one_and_exports():
    res = monte_carlo_delta(torus_graph(5, 5), 0.999, "initial_majority", trials=300, seed=0)
    assert res.errors == 0
    d = res.to_dict()
    assert d["estimator"] == "initial_majority" and d["trials"] == 300
    lines = res.to_csv().splitlines()
    assert lines[0] == "graph,p,estimator,trials,errors,rate,ci,ties"
    assert res == monte_carlo_delta(torus_graph(5, 5), 0.999, "initial_majority", trials=300, seed=0)


def test_cone_majority_single_vertex_rate():
    est = Estimator.cone_majority(n=1, t=2, r=4)
    res = monte_carlo_delta(torus_graph(6, 6), 0.7, est, trials=4000, seed=3)
    # each opinion is at least as reliable as at time 0
    assert res.error_rate <= 0.3 + 3 * sigma(0.3, 4000)
    res0 = monte_carlo_delta(torus_graph(6, 6), 0.7, Estimator.cone_majority(n=1, t=0, r=0), trials=4000, seed=3)
    assert abs(res0.error_rate - 0.3) <= 3 * sigma(0.3, 4000)


def test_bunker_resolution():
    rb = retention_bound(torus_graph(20, 20), 0.95)
    assert rb.eta == Fraction(19, 20) ** rb.ball_size
    assert len(rb.I) == len(greedy_disjoint_balls(torus_graph(20, 20), rb.radius))
    assert rb.bound == chernoff_bound(float(rb.eta), len(rb.I))
    res = monte_carlo_delta(torus_graph(20, 20), 0.95, Estimator.limit_majority("bunker"), trials=50, seed=0)
    assert res.info["I_size"] == len(rb.I) and res.info["ball_radius"] == rb.radius
    assert res.estimator == "limit_majority(bunker)"


# convergence and learning


def test_empirical_q_triangle():
    rep = empirical_q(triangle_with_loops(), 0.9, [1, 2, 3], trials=500, seed=0)
    assert all(np.all(rep.q[t] == 0) for t in (1, 2, 3))


def test_empirical_q_torus_decreasing():
    rep = empirical_q(torus_graph(10, 10), 0.9, [0, 1, 2, 4, 8], trials=2000, seed=5)
    assert rep.decreasing
    assert np.all(rep.q[8] == 0)


def test_monotone_learning_triangle():
    rep = check_monotone_learning(triangle_with_loops(), 0.9, [0, 1, 2], trials=20_000, seed=6)
    assert abs(rep.rates[0].mean() - 0.9) <= 3 * sigma(0.9, 20_000)
    assert np.all(np.abs(rep.rates[1] - 0.972) <= 3 * sigma(0.972, 20_000))
    assert rep.passed


def test_monotone_learning_async_small():
    rep = check_monotone_learning(torus_graph(6, 6), 0.8, [0, 0.5, 1, 2], trials=1000, seed=7, model="async")
    assert rep.passed


# Cesaro


def test_cesaro_single_vertex_bound():
    rep = check_cesaro_bound(torus_graph(10, 10), 0.9, 1, 0.0, 1, trials=2000, seed=2)
    assert rep.bound == pytest.approx(math.exp(-0.16 / 1.8))
    assert rep.passed


def test_cesaro_independence_controls():
    g = torus_graph(10, 10)
    pos = check_cesaro_bound(g, 0.6, 1, 0.0, 4, trials=4000, seed=3)
    assert pos.independent and pos.passed
    # r = 0 lets adjacent vertices into W; their time-1 opinions share neighbours
    neg = check_cesaro_bound(g, 0.6, 1, 0.0, 4, trials=4000, seed=3, r=0)
    assert not neg.independent
    assert THREE_SIGMA_TAIL == pytest.approx(0.0027, abs=1e-4)


def test_cesaro_w_too_small():
    with pytest.raises(WNotLargeEnough):
        check_cesaro_bound(path_graph(5), 0.9, 2, 0.0, 2, trials=5, seed=0, max_redraws=5)
