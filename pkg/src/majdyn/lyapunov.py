"""Edge weightings, the energy functional ``L`` and its per-step drop ``J``.

For configurations ``X, Y`` the energy is

    L(X, Y) = 1/4 * sum over ordered adjacent pairs (i, j) of z(i,j) (X_i - Y_j)^2

where each non-loop edge appears in both orientations and a self-loop once
(exactly one CSR slot per ordered pair).  With ``L_t = L(A_{t+1}, A_t)`` and

    J^i_t = 1/2 (A^i_{t+1} - A^i_{t-1}) * sum_j z(i,j) A^j_t

the identity ``L_t - L_{t-1} = -J_t`` holds for any three configurations; the
dynamics make every ``J^i_t`` non-negative.

Asynchronous runs are scored on the doubled sequence ``A_0, A_0, A_1, A_1,
...`` (``A_k`` = configuration after the k-th flip), so each flip contributes
two half-steps, each with a non-negative drop, and ``L`` at whole steps is the
plain disagreement energy ``L(A_k, A_k)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .dynamics import Trajectory, as_config, flip_counts, run_sync_until_cycle
from .errors import InvalidParams, MissingEdgeWeight, NotDLegal, TruncatedProfile
from .graph import Graph, GrowthProfile, growth_moment, theorem_degree

__all__ = [
    "EdgeWeighting",
    "EnergyReport",
    "MonopolyBudget",
    "default_eta",
    "make_weighting",
    "constant_weighting",
    "weighting_from_values",
    "check_d_legal",
    "check_sign_preservation",
    "argmin_update",
    "lyapunov_L",
    "drop_J",
    "energy_report",
    "flip_bound",
    "monopoly_flip_budget",
]


def _a(d: int) -> Fraction:
    return Fraction(d + 1, d - 1)


def default_eta(d: int) -> Callable[[int], Fraction]:
    """``eta(r) = 1/a + (1 - 1/a)(r+1)/(r+2)``: increasing, inside ``(1/a, 1)``."""
    inv = 1 / _a(d)

    def eta(r: int) -> Fraction:
        return inv + (1 - inv) * Fraction(r + 1, r + 2)

    return eta


@dataclass(frozen=True)
class EdgeWeighting:
    """Weights on the undirected edges of a graph, indexed like ``g.edges``."""

    d: int
    weights: tuple
    base: int | None = None
    label: str = "custom"

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def slot_values(self, g: Graph) -> np.ndarray:
        return self.values[g.edge_ids]

    def slot_exact(self, g: Graph) -> list:
        return [self.weights[e] for e in g.edge_ids.tolist()]

    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def to_text(self, g: Graph) -> str:
        """Edge list with each weight as an exact ``numerator denominator`` pair."""
        lines = [f"# weighting d={self.d} base={self.base} label={self.label}"]
        for (u, v), w in zip(g.edges.tolist(), self.weights):
            w = Fraction(w)
            lines.append(f"{u} {v} {w.numerator} {w.denominator}")
        return "\n".join(lines) + "\n"


def _check_cover(g: Graph, z: EdgeWeighting):
    if len(z.weights) != g.m:
        raise MissingEdgeWeight(f"weighting covers {len(z.weights)} of {g.m} edges")


def weighting_from_values(g: Graph, values: Sequence, d: int | None = None) -> EdgeWeighting:
    d = theorem_degree(g) if d is None else d
    ws = tuple(Fraction(str(v)) if isinstance(v, float) else Fraction(v) for v in values)
    z = EdgeWeighting(d, ws)
    _check_cover(g, z)
    return z


def constant_weighting(g: Graph, d: int | None = None) -> EdgeWeighting:
    d = theorem_degree(g) if d is None else d
    return EdgeWeighting(d, (Fraction(1),) * g.m, None, "constant")


def check_d_legal(g: Graph, z: EdgeWeighting, d: int | None = None):
    """Every pair of edges sharing a vertex must have weight ratio below ``a``.

    Returns ``(True, None)`` or ``(False, (edge1, edge2, ratio))``.
    """
    _check_cover(g, z)
    d = z.d if d is None else d
    a = _a(d)
    for w in z.weights:
        if not 0 < w <= 1:
            return False, (None, None, w)
    slots = z.slot_exact(g)
    ptr = g.indptr.tolist()
    for i in range(g.n):
        row = range(ptr[i], ptr[i + 1])
        hi = max(row, key=lambda k: slots[k])
        lo = min(row, key=lambda k: slots[k])
        ratio = slots[hi] / slots[lo]
        if ratio >= a:
            e1 = tuple(g.edges[g.edge_ids[hi]].tolist())
            e2 = tuple(g.edges[g.edge_ids[lo]].tolist())
            return False, (e1, e2, ratio)
    return True, None


def make_weighting(
    g: Graph, i0: int, d: int | None = None, eta: Callable[[int], Fraction] | None = None
) -> EdgeWeighting:
    """Summable weighting ``z(e) = a^-r eta(r) / eta(0)`` with ``r`` the distance
    of ``e`` from ``i0`` (minimum over its endpoints)."""
    d = theorem_degree(g) if d is None else d
    if d < 2:
        raise InvalidParams("d must be >= 2")
    a = _a(d)
    eta = default_eta(d) if eta is None else eta
    dist = g.distances_from(i0)
    r_edge = np.minimum(dist[g.edges[:, 0]], dist[g.edges[:, 1]]).tolist()
    e0 = eta(0)
    table = {}
    for r in set(r_edge):
        table[r] = eta(r) / e0 / a**r
    z = EdgeWeighting(d, tuple(table[r] for r in r_edge), i0, "summable")

    ok, witness = check_d_legal(g, z, d)
    if not ok:
        raise NotDLegal(f"constructed weighting violates legality at {witness}")
    profile = growth_moment(g, i0, d)
    if z.total() > a * d * profile.moment_exact:
        raise NotDLegal("constructed weighting exceeds its summability bound")
    return z


def _signs(x):
    return np.where(np.asarray(x) > 0, 1, np.where(np.asarray(x) < 0, -1, 0))


def _weighted_sums(g: Graph, z: EdgeWeighting, c, exact: bool):
    if exact:
        slots = z.slot_exact(g)
        idx = g.indices.tolist()
        ptr = g.indptr.tolist()
        cl = [int(x) for x in c]
        return [
            sum((slots[k] * cl[idx[k]] for k in range(ptr[i], ptr[i + 1])), Fraction(0))
            for i in range(g.n)
        ]
    w = z.slot_values(g) * np.asarray(c, dtype=float)[g.indices]
    return np.add.reduceat(w, g.indptr[:-1])


def check_sign_preservation(g: Graph, z: EdgeWeighting, c, exact: bool = False):
    """Weighted and unweighted neighbourhood sums must agree in sign everywhere.

    Returns ``(True, None)`` or ``(False, vertex)``.
    """
    c = as_config(c, g.n)
    _check_cover(g, z)
    plain = np.add.reduceat(c.astype(np.int64)[g.indices], g.indptr[:-1])
    weighted = _weighted_sums(g, z, c, exact)
    ws = np.array([(w > 0) - (w < 0) for w in weighted]) if exact else _signs(weighted)
    bad = np.flatnonzero(_signs(plain) != ws)
    return (True, None) if len(bad) == 0 else (False, int(bad[0]))


def argmin_update(g: Graph, z: EdgeWeighting, c) -> np.ndarray:
    """Each vertex picks the ``a`` in {-1, +1} minimising ``sum_j z(i,j)(c_j - a)^2``."""
    c = as_config(c, g.n).astype(float)
    w = z.slot_values(g)
    nb = c[g.indices]
    e_plus = np.add.reduceat(w * (nb - 1) ** 2, g.indptr[:-1])
    e_minus = np.add.reduceat(w * (nb + 1) ** 2, g.indptr[:-1])
    return np.where(e_plus < e_minus, 1, -1).astype(np.int8)


def _rows(g: Graph) -> np.ndarray:
    return np.repeat(np.arange(g.n), g.degrees)


def lyapunov_L(g: Graph, z: EdgeWeighting, c_next, c_now, exact: bool = False):
    """``L(c_next, c_now)``; a Fraction when ``exact`` else a float."""
    _check_cover(g, z)
    x = np.asarray(c_next)
    y = np.asarray(c_now)
    differ = x[_rows(g)] != y[g.indices]
    if exact:
        slots = z.slot_exact(g)
        # each disagreeing term is (±2)^2 / 4 = 1 times its weight
        return sum((slots[k] for k in np.flatnonzero(differ).tolist()), Fraction(0))
    # correctly rounded, so equal multisets of weights give identical energies
    return math.fsum(z.slot_values(g)[differ].tolist())


def drop_J(g: Graph, z: EdgeWeighting, c_prev, c_now, c_next, exact: bool = False):
    """``(J_total, per_vertex)`` with ``J^i = 1/2 (c_next_i - c_prev_i) sum_j z(i,j) c_now_j``."""
    _check_cover(g, z)
    x = np.asarray(c_prev).astype(np.int64)
    w_next = np.asarray(c_next).astype(np.int64)
    half = (w_next - x) // 2
    sums = _weighted_sums(g, z, c_now, exact)
    if exact:
        per = [int(h) * s for h, s in zip(half.tolist(), sums)]
        return sum(per, Fraction(0)), per
    per = half * sums
    return float(per.sum()), per


@dataclass
class EnergyReport:
    model: str
    exact: bool
    times: list
    L_values: list
    J_values: list
    J_per_vertex: list
    residuals: list

    @property
    def max_residual(self):
        return max(self.residuals, default=0)

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.L_values, self.L_values[1:]))

    @property
    def min_J(self):
        return min((min(p) for p in self.J_per_vertex), default=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "L", "J", "residual"])
        w.writerow([self.times[0], float(self.L_values[0]), "", ""])
        for k in range(1, len(self.L_values)):
            w.writerow(
                [self.times[k], float(self.L_values[k]), float(self.J_values[k - 1]),
                 float(self.residuals[k - 1])]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "exact": self.exact,
                "t": [float(t) for t in self.times],
                "L": [str(v) if self.exact else v for v in self.L_values],
                "J": [str(v) if self.exact else v for v in self.J_values],
                "residual": [str(v) if self.exact else v for v in self.residuals],
            }
        )


def energy_report(g: Graph, z: EdgeWeighting, traj: Trajectory, exact: bool = False) -> EnergyReport:
    """Energy along a trajectory with the drop identity residual at each step."""
    if traj.model == "sync":
        seq = list(traj.configs)
        times = list(range(len(seq) - 1))
    else:
        seq, times = [], [0.0]
        for k, c in enumerate(traj.flip_configs()):
            seq += [c, c]
            if k:
                t = float(traj.flip_times[k - 1])
                times += [t, t]
        times = times[: len(seq) - 1]
    L = [lyapunov_L(g, z, seq[s + 1], seq[s], exact) for s in range(len(seq) - 1)]
    J, per, res = [], [], []
    for s in range(1, len(seq) - 1):
        total, pv = drop_J(g, z, seq[s - 1], seq[s], seq[s + 1], exact)
        J.append(total)
        per.append(list(pv) if exact else pv)
        res.append(abs(L[s] - L[s - 1] + total))
    return EnergyReport(traj.model, exact, times, L, J, per, res)


def flip_bound(profile: GrowthProfile, d: int | None = None, model: str = "sync") -> float:
    """Cap on flips at the profile's base vertex: ``a d M`` (sync), ``a 2d M`` (async)."""
    d = profile.d if d is None else d
    a = (d + 1) / (d - 1)
    if profile.d == d:
        moment = profile.moment
    else:
        moment = sum(n / a**r for r, n in enumerate(profile.sphere_sizes))
    if profile.truncated:
        warnings.warn(
            "sphere profile is truncated; the bound uses a partial growth moment",
            TruncatedProfile,
            stacklevel=2,
        )
    if model == "sync":
        return a * d * moment
    if model == "async":
        return a * 2 * d * moment
    raise InvalidParams(f"unknown model {model!r}")


@dataclass
class MonopolyOutcome:
    L0: int
    events: int
    ok: bool
    trajectory: Trajectory


@dataclass
class MonopolyBudget:
    """Unit-weight accounting for a seed set ``W``: +1 on ``W``, -1 elsewhere.

    With constant weights ``L`` and every ``J^i`` are integers, so the number
    of (vertex, time) pairs with ``A_{t+1} != A_{t-1}`` cannot exceed ``L0``.
    """

    graph: Graph
    W: frozenset
    initial: np.ndarray
    L0: int

    def check(self, t_max: int | None = None) -> MonopolyOutcome:
        traj = run_sync_until_cycle(self.graph, self.initial, t_max)
        events = int(flip_counts(traj).sum())
        return MonopolyOutcome(self.L0, events, events <= self.L0, traj)


def monopoly_flip_budget(g: Graph, W) -> MonopolyBudget:
    W = frozenset(int(v) for v in W)
    c0 = -np.ones(g.n, dtype=np.int8)
    c0[list(W)] = 1
    c1 = run_sync_until_cycle(g, c0).config_at(1)
    L0 = int(np.count_nonzero(c1[_rows(g)] != c0[g.indices]))
    return MonopolyBudget(g, W, c0, L0)
