"""Odd-degree bounded graphs, the generators used by the experiments, and
growth geometry (sphere sizes, growth moment, bunker radius).

Vertices are dense integers ``0..n-1``.  Adjacency is stored in CSR form with
each row sorted; a self-loop puts ``i`` into its own row exactly once, so it
counts 1 toward the degree and contributes the vertex's own opinion to its
majority sum.  Distances ignore self-loops.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import (
    CannotNormalize,
    DegenerateComponent,
    DegreeExceeded,
    Disconnected,
    DuplicateEdge,
    EvenDegree,
    GraphFormatError,
    InvalidParams,
    NotRegular,
    NotSeparating,
)

__all__ = [
    "Graph",
    "GrowthProfile",
    "build_graph",
    "normalize_odd_degrees",
    "sphere_sizes",
    "growth_moment",
    "profile_from_sizes",
    "family_profile",
    "theorem_degree",
    "gen_lattice_family",
    "gen_gadget_graph",
    "gen_percolation_subgraph",
    "gen_random_odd_graph",
    "path_graph",
    "cycle_graph",
    "torus_graph",
    "tree_ball",
    "triangle_with_loops",
    "complete_graph",
    "complete_bipartite",
    "circular_ladder",
    "read_graph",
    "write_graph",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable odd-degree undirected graph.

    ``edges`` lists every undirected edge once as ``(u, v)`` with ``u <= v``
    (self-loops have ``u == v``), sorted lexicographically; ``edge_ids`` maps
    each CSR slot to its row in ``edges``.
    """

    n: int
    d_max: int
    indptr: np.ndarray
    indices: np.ndarray
    edge_ids: np.ndarray
    edges: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def has_loop(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        loops = self.edges[self.edges[:, 0] == self.edges[:, 1], 0]
        out[loops] = True
        return out

    @cached_property
    def loops(self) -> np.ndarray:
        return np.flatnonzero(self.has_loop)

    @cached_property
    def adj_lists(self) -> list[list[int]]:
        ptr = self.indptr.tolist()
        idx = self.indices.tolist()
        return [idx[ptr[i] : ptr[i + 1]] for i in range(self.n)]

    def edge_list(self, include_loops: bool = False) -> list[tuple[int, int]]:
        rows = self.edges if include_loops else self.edges[self.edges[:, 0] != self.edges[:, 1]]
        return [(int(u), int(v)) for u, v in rows]

    def edge_index(self, u: int, v: int) -> int:
        """Row of ``{u, v}`` in ``edges``."""
        row = self.neighbors(u)
        k = int(np.searchsorted(row, v))
        if k >= len(row) or row[k] != v:
            raise KeyError((u, v))
        return int(self.edge_ids[self.indptr[u] + k])

    def distances_from(self, i: int, cutoff: int | None = None) -> np.ndarray:
        """BFS distances from ``i``; -1 for vertices beyond ``cutoff``."""
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[i] = 0
        adj = self.adj_lists
        queue = deque([i])
        while queue:
            u = queue.popleft()
            du = dist[u]
            if cutoff is not None and du >= cutoff:
                continue
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue.append(v)
        return dist

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        mat = csr_matrix(
            (np.ones(len(self.indices)), self.indices, self.indptr), shape=(self.n, self.n)
        )
        return shortest_path(mat, unweighted=True, directed=False).astype(np.int32)

    @cached_property
    def diameter(self) -> int:
        return int(self.distance_matrix.max())

    def ball(self, i: int, r: int) -> np.ndarray:
        return np.flatnonzero(self.distances_from(i, cutoff=r) >= 0)

    def growth_moments(self, d: int | None = None) -> np.ndarray:
        """Exhaustive growth moment of every vertex (cached per ``d``)."""
        d = theorem_degree(self) if d is None else d
        cache = self.__dict__.setdefault("_moment_cache", {})
        if d not in cache:
            a = (d + 1) / (d - 1)
            cache[d] = (a ** -self.distance_matrix.astype(float)).sum(axis=1)
        return cache[d]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.d_max == other.d_max
            and np.array_equal(self.edges, other.edges)
        )

    def __hash__(self):
        return hash((self.n, self.d_max, self.edges.tobytes()))

    def __repr__(self):
        kind = self.meta.get("kind", "graph")
        return f"Graph({kind}, n={self.n}, m={self.m}, d_max={self.d_max})"


def theorem_degree(g: Graph) -> int:
    """Smallest odd ``d >= 3`` bounding every degree of ``g``."""
    d = max(3, int(g.d_max))
    return d if d % 2 else d + 1


def _canonical_edges(n, edge_list, self_loops):
    seen = set()
    rows = []
    for e in edge_list:
        u, v = (int(x) for x in e)
        if u == v:
            raise InvalidParams(f"edge ({u}, {v}) is a self-loop; pass it in self_loops")
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidParams(f"edge ({u}, {v}) has an id outside [0, {n})")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"edge {key} listed twice")
        seen.add(key)
        rows.append(key)
    for u in self_loops:
        u = int(u)
        if not 0 <= u < n:
            raise InvalidParams(f"self-loop at {u} outside [0, {n})")
        if (u, u) in seen:
            raise DuplicateEdge(f"self-loop at {u} listed twice")
        seen.add((u, u))
        rows.append((u, u))
    rows.sort()
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def _degrees_of(n, edges):
    deg = np.zeros(n, dtype=np.int64)
    loop = edges[:, 0] == edges[:, 1]
    np.add.at(deg, edges[~loop, 0], 1)
    np.add.at(deg, edges[~loop, 1], 1)
    np.add.at(deg, edges[loop, 0], 1)
    return deg


def _assemble(n, edges, d_max, meta=None) -> Graph:
    """CSR assembly plus the full invariant check."""
    if n == 0:
        raise InvalidParams("graph has no vertices")
    deg = _degrees_of(n, edges)
    over = np.flatnonzero(deg > d_max)
    if len(over):
        raise DegreeExceeded(int(over[0]), int(deg[over[0]]), d_max)
    even = np.flatnonzero(deg % 2 == 0)
    if len(even):
        raise EvenDegree(int(even[0]), int(deg[even[0]]))

    loop = edges[:, 0] == edges[:, 1]
    eid = np.arange(len(edges))
    src = np.concatenate([edges[:, 0], edges[~loop, 1]])
    dst = np.concatenate([edges[:, 1], edges[~loop, 0]])
    ids = np.concatenate([eid, eid[~loop]])
    order = np.lexsort((dst, src))
    src, dst, ids = src[order], dst[order], ids[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])

    g = Graph(
        n=int(n),
        d_max=int(d_max),
        indptr=indptr,
        indices=dst.astype(np.int64),
        edge_ids=ids.astype(np.int64),
        edges=edges,
        meta=dict(meta or {}),
    )
    if n > 1:
        ncomp, _ = connected_components(
            csr_matrix((np.ones(len(g.indices)), g.indices, g.indptr), shape=(n, n)),
            directed=False,
        )
        if ncomp != 1:
            raise Disconnected(f"graph has {ncomp} connected components")
    return g


def _infer_n(edge_list, self_loops):
    ids = [int(x) for e in edge_list for x in e] + [int(u) for u in self_loops]
    return max(ids) + 1 if ids else 0


def build_graph(
    edge_list: Iterable[Sequence[int]],
    self_loops: Iterable[int] = (),
    d_max: int | None = None,
    n: int | None = None,
    meta: dict | None = None,
) -> Graph:
    """Validate and assemble a graph; every degree must already be odd."""
    edge_list = list(edge_list)
    self_loops = list(self_loops)
    if n is None:
        n = _infer_n(edge_list, self_loops)
    edges = _canonical_edges(n, edge_list, self_loops)
    if d_max is None:
        d_max = int(_degrees_of(n, edges).max()) if n else 0
    return _assemble(n, edges, d_max, meta)


def normalize_odd_degrees(
    g_or_edges,
    self_loops: Iterable[int] = (),
    *,
    cap: int | Sequence[int] | np.ndarray,
    n: int | None = None,
    d_max: int | None = None,
    meta: dict | None = None,
) -> Graph:
    """Toggle the self-loop of every even-degree vertex.

    A present loop is removed; an absent one is added only when the degree is
    strictly below ``cap`` (an int or a per-vertex array holding the base
    graph's degree), so no degree ever exceeds its cap.
    """
    if isinstance(g_or_edges, Graph):
        return g_or_edges
    edge_list = list(g_or_edges)
    self_loops = list(self_loops)
    if n is None:
        n = _infer_n(edge_list, self_loops)
    edges = _canonical_edges(n, edge_list, self_loops)
    deg = _degrees_of(n, edges)
    caps = np.broadcast_to(np.asarray(cap, dtype=np.int64), (n,))
    loops = set(int(u) for u in edges[edges[:, 0] == edges[:, 1], 0])
    for i in np.flatnonzero(deg % 2 == 0):
        i = int(i)
        if i in loops:
            loops.discard(i)
        elif deg[i] < caps[i]:
            loops.add(i)
        else:
            raise CannotNormalize(i, int(deg[i]), int(caps[i]))
    plain = edges[edges[:, 0] != edges[:, 1]]
    rows = [tuple(r) for r in plain.tolist()] + [(u, u) for u in loops]
    rows.sort()
    edges = np.array(rows, dtype=np.int64).reshape(-1, 2)
    if d_max is None:
        d_max = int(caps.max()) if n else 0
    return _assemble(n, edges, d_max, meta)


# growth geometry


def sphere_sizes(g: Graph, i: int, R: int) -> list[int]:
    """``[n_0, ..., n_R]``: vertex counts at each graph distance from ``i``."""
    if R < 0:
        raise InvalidParams("R must be >= 0")
    dist = g.distances_from(i, cutoff=R)
    counts = np.bincount(dist[dist >= 0], minlength=R + 1)
    return [int(c) for c in counts[: R + 1]]


@dataclass(frozen=True)
class GrowthProfile:
    """Sphere profile of a base vertex with its growth moment and bunker radius.

    ``moment`` is the sum of ``a**-r * n_r`` with ``a = (d+1)/(d-1)``; ``r0`` is
    the smallest radius whose weighted tail satisfies the bunker condition,
    ``None`` when it cannot be certified inside the profile.
    """

    base: int | None
    d: int
    sphere_sizes: tuple[int, ...]
    moment_exact: Fraction
    r0: int | None
    truncated: bool

    @property
    def a(self) -> Fraction:
        return Fraction(self.d + 1, self.d - 1)

    @property
    def moment(self) -> float:
        return float(self.moment_exact)

    def tail(self, r0: int) -> Fraction:
        a = self.a
        return sum(
            (Fraction(nr) / a**r for r, nr in enumerate(self.sphere_sizes) if r > r0),
            Fraction(0),
        )

    def bunker_lhs(self, r0: int) -> Fraction:
        """``a * 2d * sum_{r > r0} a^-r n_r``; the bunker condition asks for < 1."""
        return self.a * 2 * self.d * self.tail(r0)

    @property
    def bunker_radius(self) -> int | None:
        return None if self.r0 is None else self.r0 + 2


def profile_from_sizes(
    sizes: Sequence[int], d: int, base: int | None = None, truncated: bool = False
) -> GrowthProfile:
    if d < 2:
        raise InvalidParams(f"d must be >= 2, got {d}")
    sizes = tuple(int(s) for s in sizes)
    a = Fraction(d + 1, d - 1)
    terms = [Fraction(nr) / a**r for r, nr in enumerate(sizes)]
    moment = sum(terms, Fraction(0))
    # suffix sums: tails[r0] = sum over r > r0
    tails = [Fraction(0)] * len(sizes)
    acc = Fraction(0)
    for r in range(len(sizes) - 1, -1, -1):
        tails[r] = acc
        acc += terms[r]
    coef = a * 2 * d
    r0 = next((r for r in range(len(sizes)) if coef * tails[r] < 1), None)
    if truncated and r0 is not None and r0 == len(sizes) - 1 and tails[r0] == 0 and sizes[-1] > 0:
        # the only certificate is the unknown tail beyond the profile
        r0 = None
    return GrowthProfile(base, d, sizes, moment, r0, truncated)


def growth_moment(g: Graph, i: int, d: int | None = None, R: int | None = None) -> GrowthProfile:
    """Growth profile of ``g`` around ``i``; exhaustive when ``R`` is None."""
    d = theorem_degree(g) if d is None else d
    dist = g.distances_from(i)
    ecc = int(dist.max())
    if R is None:
        R = ecc
    sizes = np.bincount(dist, minlength=max(R, ecc) + 1)[: R + 1]
    return profile_from_sizes(sizes, d, base=i, truncated=ecc > R)


def family_profile(kind: str, d: int, R: int, **params) -> GrowthProfile:
    """Analytic sphere bound ``f(r)`` of an infinite lattice family, up to ``R``.

    path/cycle: 2 per sphere; torus: the square lattice's ``4r``; tree_ball:
    ``d (d-1)^(r-1)`` (only ``depth`` spheres are non-empty).
    """
    if kind in ("path", "cycle"):
        sizes = [1] + [2] * R
        truncated = True
    elif kind == "torus":
        sizes = [1] + [4 * r for r in range(1, R + 1)]
        truncated = True
    elif kind == "tree_ball":
        k = params.get("d", d)
        depth = params.get("depth", R)
        sizes = [1] + [k * (k - 1) ** (r - 1) if r <= depth else 0 for r in range(1, R + 1)]
        truncated = depth > R
    else:
        raise InvalidParams(f"no analytic profile for family {kind!r}")
    return profile_from_sizes(sizes, d, truncated=truncated)


# generators


def _finish(n, edge_list, cap, meta, loops=()):
    return normalize_odd_degrees(edge_list, loops, cap=cap, n=n, d_max=int(np.max(cap)), meta=meta)


def path_graph(n: int) -> Graph:
    if n < 1:
        raise InvalidParams("path needs n >= 1")
    if n == 1:
        return build_graph([], [0], d_max=3, n=1, meta={"kind": "path", "params": {"n": 1}})
    return _finish(n, [(i, i + 1) for i in range(n - 1)], 3, {"kind": "path", "params": {"n": n}})


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidParams("cycle needs n >= 3")
    return _finish(n, [(i, (i + 1) % n) for i in range(n)], 3, {"kind": "cycle", "params": {"n": n}})


def torus_graph(rows: int, cols: int | None = None) -> Graph:
    cols = rows if cols is None else cols
    if rows < 3 or cols < 3:
        raise InvalidParams("torus needs both sides >= 3")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            edges.append((v, r * cols + (c + 1) % cols))
            edges.append((v, ((r + 1) % rows) * cols + c))
    meta = {"kind": "torus", "params": {"rows": rows, "cols": cols}}
    return _finish(rows * cols, edges, 5, meta)


def tree_ball(d: int, depth: int) -> Graph:
    """Ball of radius ``depth`` around the root of the ``d``-regular tree."""
    if d < 3 or d % 2 == 0:
        raise InvalidParams("tree degree must be odd and >= 3")
    if depth < 0:
        raise InvalidParams("depth must be >= 0")
    edges = []
    frontier = [0]
    nxt = 1
    for level in range(depth):
        new = []
        for v in frontier:
            for _ in range(d if level == 0 else d - 1):
                edges.append((v, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return _finish(nxt, edges, d, {"kind": "tree_ball", "params": {"d": d, "depth": depth}})


def triangle_with_loops() -> Graph:
    return build_graph([(0, 1), (1, 2), (0, 2)], [0, 1, 2], d_max=3, meta={"kind": "triangle"})


def complete_graph(n: int) -> Graph:
    if n < 2 or n % 2:
        raise InvalidParams("complete graph needs an even vertex count for odd degrees")
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return build_graph(edges, d_max=n - 1, meta={"kind": "complete", "params": {"n": n}})


def complete_bipartite(d: int) -> Graph:
    """``K_{d,d}`` with sides ``0..d-1`` and ``d..2d-1``."""
    if d < 1 or d % 2 == 0:
        raise InvalidParams("K_{d,d} needs odd d")
    edges = [(i, d + j) for i in range(d) for j in range(d)]
    return build_graph(edges, d_max=d, meta={"kind": "complete_bipartite", "params": {"d": d}})


def circular_ladder(k: int) -> Graph:
    """Prism over a ``k``-cycle: 3-regular on ``2k`` vertices."""
    if k < 3:
        raise InvalidParams("circular ladder needs k >= 3")
    edges = []
    for i in range(k):
        edges += [(i, (i + 1) % k), (k + i, k + (i + 1) % k), (i, k + i)]
    return build_graph(edges, d_max=3, meta={"kind": "circular_ladder", "params": {"k": k}})


_LATTICES = {
    "path": lambda p: path_graph(p["n"]),
    "cycle": lambda p: cycle_graph(p["n"]),
    "torus": lambda p: torus_graph(p["rows"], p.get("cols", p["rows"])),
    "tree_ball": lambda p: tree_ball(p["d"], p["depth"]),
}


def gen_lattice_family(kind: str, **params) -> Graph:
    try:
        make = _LATTICES[kind]
    except KeyError:
        raise InvalidParams(f"unknown lattice family {kind!r}") from None
    try:
        return make(params)
    except KeyError as exc:
        raise InvalidParams(f"{kind} requires parameter {exc.args[0]!r}") from None


def gen_random_odd_graph(n: int, d_max: int, rng: np.random.Generator, extra: float = 0.5) -> Graph:
    """Random connected graph with all degrees odd and at most ``d_max``.

    A random tree with degrees below ``d_max`` is thickened with about
    ``extra * n`` random edges, then even-degree vertices receive self-loops.
    """
    if d_max < 3 or d_max % 2 == 0:
        raise InvalidParams("d_max must be odd and >= 3")
    if n < 1:
        raise InvalidParams("n must be >= 1")
    limit = d_max - 1
    deg = np.zeros(n, dtype=np.int64)
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        v = int(order[k])
        avail = [int(u) for u in order[:k] if deg[u] < limit]
        u = avail[int(rng.integers(len(avail)))]
        edges.add((min(u, v), max(u, v)))
        deg[u] += 1
        deg[v] += 1
    for _ in range(int(extra * n)):
        u, v = (int(x) for x in rng.integers(n, size=2))
        key = (min(u, v), max(u, v))
        if u == v or key in edges or deg[u] >= limit or deg[v] >= limit:
            continue
        edges.add(key)
        deg[u] += 1
        deg[v] += 1
    meta = {"kind": "random_odd", "params": {"n": n, "d_max": d_max}}
    return normalize_odd_degrees(sorted(edges), cap=d_max, n=n, d_max=d_max, meta=meta)


def gen_gadget_graph(
    g_prime: Graph, F: Iterable[Sequence[int]], max_component: int | None = None
) -> Graph:
    """Replace each edge ``{i, j}`` of ``F`` by a copy of ``K_{d,d}`` minus one edge.

    For every replaced edge the copy's ``a`` side attaches to ``i`` and its
    ``b`` side to ``j``.  ``meta["gadgets"]`` records each copy's sides.
    Removing ``F`` must split ``g_prime`` into finite pieces; every piece of a
    finite graph is finite, so ``max_component`` optionally imposes a concrete
    size limit in its place.
    """
    degs = g_prime.degrees
    d = int(degs[0])
    if not np.all(degs == d) or d < 3 or d % 2 == 0:
        raise NotRegular("base graph must be d-regular with odd d >= 3")
    F = [(min(int(u), int(v)), max(int(u), int(v))) for u, v in F]
    if len(set(F)) != len(F):
        raise DuplicateEdge("F lists an edge twice")
    base = set(g_prime.edge_list())
    for e in F:
        if e not in base:
            raise InvalidParams(f"{e} is not an edge of the base graph")
    if not F:
        return g_prime

    kept = sorted(base - set(F))
    if max_component is not None:
        rows = [u for u, _ in kept] + [v for _, v in kept]
        cols = [v for _, v in kept] + [u for u, _ in kept]
        mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g_prime.n, g_prime.n))
        _, labels = connected_components(mat, directed=False)
        biggest = int(np.bincount(labels).max())
        if biggest > max_component:
            raise NotSeparating(
                f"removing F leaves a component of {biggest} vertices (> {max_component})"
            )

    edges = list(kept)
    loops = [int(u) for u in g_prime.loops]
    gadgets = []
    nxt = g_prime.n
    for i, j in F:
        A = list(range(nxt, nxt + d))
        B = list(range(nxt + d, nxt + 2 * d))
        nxt += 2 * d
        a, b = A[0], B[0]
        edges += [(x, y) for x in A for y in B if (x, y) != (a, b)]
        edges += [(i, a), (j, b)]
        gadgets.append({"edge": (i, j), "A": A, "B": B, "a": a, "b": b})
    meta = {"kind": "gadget", "d": d, "gadgets": gadgets, "base_n": g_prime.n}
    return build_graph(edges, loops, d_max=d, n=nxt, meta=meta)


def gen_percolation_subgraph(g0: Graph, q: float, seed) -> Graph:
    """Bond percolation on ``g0`` restricted to its largest cluster.

    Each non-loop edge survives with probability ``q``; self-loops of ``g0``
    are kept, then re-toggled so degrees are odd without exceeding their
    degree in ``g0``.  This finite cluster stands in for an infinite
    invariant random subgraph.
    """
    if not 0 <= q <= 1:
        raise InvalidParams(f"q must lie in [0, 1], got {q}")
    rng = np.random.default_rng(seed)
    plain = g0.edges[g0.edges[:, 0] != g0.edges[:, 1]]
    keep = rng.random(len(plain)) < q
    kept = plain[keep]
    mat = csr_matrix(
        (np.ones(2 * len(kept)), (np.r_[kept[:, 0], kept[:, 1]], np.r_[kept[:, 1], kept[:, 0]])),
        shape=(g0.n, g0.n),
    )
    _, labels = connected_components(mat, directed=False)
    sizes = np.bincount(labels)
    # ties go to the cluster containing the smallest vertex id
    best = int(labels[np.flatnonzero(sizes[labels] == sizes.max())[0]])
    members = np.flatnonzero(labels == best)
    if len(members) < 3:
        raise DegenerateComponent(f"largest cluster has {len(members)} vertices")
    relabel = np.full(g0.n, -1, dtype=np.int64)
    relabel[members] = np.arange(len(members))
    inside = (relabel[kept[:, 0]] >= 0) & (relabel[kept[:, 1]] >= 0)
    edge_list = relabel[kept[inside]].tolist()
    loops = relabel[[u for u in g0.loops if relabel[u] >= 0]].tolist()
    meta = {
        "kind": "percolation",
        "q": q,
        "seed": seed,
        "base": repr(g0),
        "original_ids": members.tolist(),
        "stand_in": "largest bond-percolation cluster of a finite transitive graph, "
        "standing in for an infinite invariant random subgraph",
    }
    return normalize_odd_degrees(
        edge_list, loops, cap=g0.degrees[members], n=len(members), d_max=g0.d_max, meta=meta
    )


# text format

_HEADER = re.compile(r"^graph\s+n=(\d+)\s+dmax=(\d+)$")


def write_graph(g: Graph) -> str:
    lines = [f"graph n={g.n} dmax={g.d_max}"]
    for u, v in g.edges.tolist():
        lines.append(f"loop {u}" if u == v else f"e {u} {v}")
    return "\n".join(lines) + "\n"


def read_graph(text: str) -> Graph:
    """Parse the line format ``graph n=.. dmax=..`` / ``e u v`` / ``loop u``."""
    header = None
    edges, loops = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            m = _HEADER.match(line)
            if not m:
                raise GraphFormatError(f"line {lineno}: expected 'graph n=<n> dmax=<d>' header")
            header = (int(m.group(1)), int(m.group(2)))
            continue
        parts = line.split()
        try:
            if parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "loop" and len(parts) == 2:
                loops.append(int(parts[1]))
            else:
                raise ValueError
        except ValueError:
            raise GraphFormatError(f"line {lineno}: cannot parse {raw!r}") from None
    if header is None:
        raise GraphFormatError("missing header line")
    n, d_max = header
    return build_graph(edges, loops, d_max=d_max, n=n, meta={"kind": "file"})
