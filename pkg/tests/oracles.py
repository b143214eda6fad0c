"""Independent reference implementations used as test oracles.

Everything here works from plain adjacency lists and Python integers or
Fractions, and shares no code with the package beyond reading a graph's
neighbour lists.
"""

import itertools
from collections import deque
from fractions import Fraction

import networkx as nx
import numpy as np


def nx_graph(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from((u, v) for u, v in g.edges.tolist() if u != v)
    return G


def spheres(g, i):
    d = nx.single_source_shortest_path_length(nx_graph(g), i)
    out = [0] * (max(d.values()) + 1)
    for r in d.values():
        out[r] += 1
    return out


def step(adj, c):
    return [1 if sum(c[j] for j in adj[i]) > 0 else -1 for i in range(len(adj))]


def sync_history(adj, c0, t_max=10_000):
    """Configurations up to and including the first ``t + 2`` with ``A_{t+2} == A_t``."""
    h = [list(c0)]
    while True:
        h.append(step(adj, h[-1]))
        if len(h) >= 3 and h[-1] == h[-3]:
            return h
        if len(h) > t_max:
            raise RuntimeError("no cycle")


def async_replay(adj, c0, verts):
    """Apply updates in order; return the configuration after each *flip*."""
    c = list(c0)
    out = [list(c)]
    for v in verts:
        new = 1 if sum(c[j] for j in adj[v]) > 0 else -1
        if new != c[v]:
            c[v] = new
            out.append(list(c))
    return out


def energy(adj, w, x, y):
    """1/4 sum over i, j in N(i) of w{i,j} (x_i - y_j)^2, with exact weights."""
    tot = Fraction(0)
    for i, nb in enumerate(adj):
        for j in nb:
            tot += w[frozenset((i, j))] * (x[i] - y[j]) ** 2
    return tot / 4


def drop(adj, w, a, b, c):
    per = []
    for i, nb in enumerate(adj):
        s = sum(w[frozenset((i, j))] * b[j] for j in nb)
        per.append(Fraction(c[i] - a[i], 2) * s)
    return per


def forward_cones(adj, verts):
    cones = [{v} for v in range(len(adj))]
    for v in verts:
        cones[v] = set().union(*(cones[j] for j in adj[v]))
    return cones


def limit(adj, c0):
    h = sync_history(adj, c0)
    t_cycle = len(h) - 3
    return h[t_cycle + (t_cycle % 2)]


def exact_error(adj, p, subset=None):
    """P(sign of the limit majority != S) by enumerating (S, A_0); ties count 1/2."""
    n = len(adj)
    p = Fraction(p)
    err = Fraction(0)
    for S in (1, -1):
        for agree in itertools.product((True, False), repeat=n):
            prob = Fraction(1, 2)
            for a in agree:
                prob *= p if a else 1 - p
            c0 = [S if a else -S for a in agree]
            z = limit(adj, c0)
            vals = z if subset is None else [z[i] for i in subset]
            tot = sum(vals)
            if tot == 0:
                err += prob / 2
            elif (tot > 0) != (S > 0):
                err += prob
    return err


def percolation_cluster(g0, q, seed):
    """Largest cluster after bond percolation, with the same edge order and draws."""
    plain = [(u, v) for u, v in g0.edges.tolist() if u != v]
    keep = np.random.default_rng(seed).random(len(plain)) < q
    G = nx.Graph()
    G.add_nodes_from(range(g0.n))
    G.add_edges_from(e for e, k in zip(plain, keep) if k)
    comps = sorted(nx.connected_components(G), key=lambda c: (-len(c), min(c)))
    best = sorted(comps[0])
    sub = G.subgraph(best)
    return len(best), sub.number_of_edges(), best


def w_naive(dist, marks, r):
    n = len(marks)
    return {i for i in range(n) if all(marks[i] < marks[j] for j in range(n) if j != i and dist[i][j] <= r)}


def bfs_dist(adj, i):
    dist = {i: 0}
    q = deque([i])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist
