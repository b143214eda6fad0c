"""Synchronous and asynchronous majority dynamics.

Synchronous: every vertex takes the sign of its neighbourhood sum at each
integer time.  Asynchronous: vertices carry independent unit-rate Poisson
clocks and update at their rings.  Odd degrees rule out ties.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import FlipBudgetExceeded, HorizonExceeded, InvalidParams, SizeMismatch
from .graph import Graph, theorem_degree

__all__ = [
    "AsyncSchedule",
    "Trajectory",
    "as_config",
    "step_sync",
    "run_sync_until_cycle",
    "sample_async_schedule",
    "run_async_until_stable",
    "run_async",
    "count_flips",
    "flip_counts",
    "limit_opinions",
    "is_stable",
    "light_cone",
    "causally_connected",
    "local_opinion",
    "async_flip_budgets",
]


def as_config(values, n: int | None = None) -> np.ndarray:
    c = np.asarray(values)
    if c.ndim != 1:
        raise SizeMismatch("an opinion configuration is one-dimensional")
    if n is not None and len(c) != n:
        raise SizeMismatch(f"configuration has {len(c)} entries, graph has {n} vertices")
    if not np.all((c == 1) | (c == -1)):
        raise InvalidParams("opinions must be exactly -1 or +1")
    return c.astype(np.int8)


def step_sync(g: Graph, c) -> np.ndarray:
    c = as_config(c, g.n)
    return kernels.sync_step(g.indptr, g.indices, c)


def is_stable(g: Graph, c) -> bool:
    """True when every vertex already agrees with its neighbourhood sign."""
    c = as_config(c, g.n)
    return bool(np.array_equal(kernels.sync_step(g.indptr, g.indices, c), c))


@dataclass(frozen=True)
class AsyncSchedule:
    """Merged Poisson ring times, strictly increasing, all ``<= horizon``."""

    times: np.ndarray
    vertices: np.ndarray
    horizon: float
    seed: object = None
    resampled: int = 0

    def __len__(self):
        return len(self.times)

    def until(self, t: float) -> "AsyncSchedule":
        k = int(np.searchsorted(self.times, t, side="right"))
        return AsyncSchedule(self.times[:k], self.vertices[:k], t, self.seed, self.resampled)

    @classmethod
    def from_events(cls, events, horizon: float | None = None) -> "AsyncSchedule":
        """Explicit ``(time, vertex)`` events, e.g. for hand-worked examples."""
        events = sorted((float(t), int(v)) for t, v in events)
        times = np.array([t for t, _ in events], dtype=float)
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise InvalidParams("event times must be distinct")
        if len(times) and times[0] <= 0:
            raise InvalidParams("event times must be positive")
        verts = np.array([v for _, v in events], dtype=np.int64)
        if horizon is None:
            horizon = float(times[-1]) if len(times) else 0.0
        return cls(times, verts, float(horizon))


class _PoissonClocks:
    """Independent unit-rate clocks revealed in unit-length blocks.

    Block ``k`` covers ``(k, k+1]``; the schedule on ``[0, H]`` is therefore
    the same whether it is drawn at once or extended lazily.
    """

    def __init__(self, n: int, rng: np.random.Generator, start: float = 0.0):
        self.n = n
        self.rng = rng
        self.now = start
        self.next = start + rng.exponential(size=n)
        self.resampled = 0

    def block(self, end: float):
        while True:
            saved = self.next.copy()
            times, verts = [], []
            pending = np.flatnonzero(self.next <= end)
            while len(pending):
                times.append(self.next[pending].copy())
                verts.append(pending)
                self.next[pending] += self.rng.exponential(size=len(pending))
                pending = pending[self.next[pending] <= end]
            if times:
                t = np.concatenate(times)
                v = np.concatenate(verts).astype(np.int64)
                order = np.argsort(t, kind="stable")
                t, v = t[order], v[order]
            else:
                t, v = np.zeros(0), np.zeros(0, dtype=np.int64)
            if len(t) > 1 and np.any(np.diff(t) == 0):
                # simultaneous rings: redraw the block with fresh samples
                self.next = saved
                self.resampled += 1
                continue
            self.now = end
            return t, v

    def until(self, horizon: float):
        ts, vs = [], []
        while self.now < horizon:
            t, v = self.block(min(math.floor(self.now) + 1.0, horizon))
            ts.append(t)
            vs.append(v)
        if not ts:
            return np.zeros(0), np.zeros(0, dtype=np.int64)
        return np.concatenate(ts), np.concatenate(vs)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_async_schedule(g: Graph | int, horizon: float, seed) -> AsyncSchedule:
    if horizon <= 0:
        raise InvalidParams("horizon must be positive")
    n = g if isinstance(g, int) else g.n
    clocks = _PoissonClocks(n, _rng(seed))
    t, v = clocks.until(horizon)
    return AsyncSchedule(t, v, float(horizon), seed, clocks.resampled)


@dataclass
class Trajectory:
    """Result of one run.

    Synchronous runs keep every configuration ``A_0..A_{t_cycle+2}`` in
    ``configs``; later times follow by period-2 continuation.  Asynchronous
    runs keep the initial configuration and the chronological flip events.
    """

    model: str
    initial: np.ndarray
    final: np.ndarray
    t_cycle: float
    period: int | None = None
    configs: np.ndarray | None = None
    flip_vertices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    flip_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    events_applied: int = 0
    schedule: AsyncSchedule | None = None
    stable: bool = True

    @property
    def n(self) -> int:
        return len(self.initial)

    @property
    def flips(self) -> list[tuple[int, float]]:
        return list(zip(self.flip_vertices.tolist(), self.flip_times.tolist()))

    @property
    def flip_log(self) -> list[list[float]]:
        log = [[] for _ in range(self.n)]
        for v, t in self.flips:
            log[v].append(t)
        return log

    def config_at(self, t) -> np.ndarray:
        if self.model == "sync":
            t = int(t)
            last = len(self.configs) - 1
            if t > last:
                t = self.t_cycle + (t - self.t_cycle) % 2
            return self.configs[t].copy()
        c = self.initial.copy()
        k = int(np.searchsorted(self.flip_times, t, side="right"))
        for v in self.flip_vertices[:k]:
            c[v] = -c[v]
        return c

    def flip_configs(self) -> list[np.ndarray]:
        """Asynchronous: the configuration after each flip, starting with ``A_0``."""
        out = [self.initial.copy()]
        c = self.initial.copy()
        for v in self.flip_vertices:
            c[v] = -c[v]
            out.append(c.copy())
        return out

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "t_cycle": self.t_cycle,
            "period": self.period,
            "flips": [[int(v), float(t)] for v, t in self.flips],
            "final": self.final.astype(int).tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def flip_log_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "time"])
        for v, t in self.flips:
            w.writerow([v, t])
        return buf.getvalue()


def run_sync_until_cycle(g: Graph, c0, t_max: int | None = None) -> Trajectory:
    """Iterate synchronous updates until ``A_{t+2} == A_t``.

    The default horizon ``m + 3`` is safe: with unit weights the Lyapunov
    energy starts at most at ``m`` and drops by at least one at every step
    before the cycle.
    """
    c0 = as_config(c0, g.n)
    if t_max is None:
        t_max = g.m + 3
    if t_max < 2:
        raise InvalidParams("t_max must be >= 2")
    hist, t_cycle = kernels.sync_run(g.indptr, g.indices, c0, int(t_max))
    if t_cycle < 0:
        raise HorizonExceeded(f"no period <= 2 reached by t={t_max}")
    period = 1 if np.array_equal(hist[t_cycle + 1], hist[t_cycle]) else 2
    changed = np.nonzero(hist[1:] != hist[:-1])
    order = np.lexsort((changed[1], changed[0]))
    return Trajectory(
        model="sync",
        initial=c0.copy(),
        final=hist[-1].copy(),
        t_cycle=int(t_cycle),
        period=period,
        configs=hist,
        flip_vertices=changed[1][order].astype(np.int64),
        flip_times=(changed[0][order] + 1).astype(float),
    )


def async_flip_budgets(g: Graph, d: int | None = None) -> np.ndarray:
    """Per-vertex cap ``a * 2d * M_d(G, i)`` on asynchronous opinion changes."""
    d = theorem_degree(g) if d is None else d
    a = (d + 1) / (d - 1)
    return a * 2 * d * g.growth_moments(d)


def run_async_until_stable(
    g: Graph,
    c0,
    seed=None,
    schedule: AsyncSchedule | None = None,
    budgets: np.ndarray | None = None,
) -> Trajectory:
    """Run asynchronous updates until the configuration is a fixed point.

    ``schedule`` (if given) is applied first; afterwards the clocks are
    revealed lazily from ``seed`` one unit of time at a time.  Any vertex
    exceeding its flip budget, or more than ``n * sum(budgets)`` events,
    raises ``FlipBudgetExceeded``.
    """
    c = as_config(c0, g.n).copy()
    initial = c.copy()
    if budgets is None:
        budgets = async_flip_budgets(g)
    max_events = g.n * math.ceil(float(np.sum(budgets)) + 1)
    counts = np.zeros(g.n, dtype=np.int64)
    fv, ft, ev_t, ev_v = [], [], [], []
    applied = 0

    def feed(times, verts):
        nonlocal applied
        pos, consumed, stable = kernels.async_run(g.indptr, g.indices, c, verts, True)
        ev_t.append(times[:consumed])
        ev_v.append(verts[:consumed])
        applied += consumed
        if len(pos):
            fv.append(verts[pos])
            ft.append(times[pos])
            np.add.at(counts, verts[pos], 1)
            worst = int(np.argmax(counts - budgets))
            if counts[worst] > budgets[worst]:
                raise FlipBudgetExceeded(
                    f"vertex {worst} flipped {counts[worst]} times, budget {budgets[worst]:.3f}"
                )
        return stable

    start = 0.0
    stable = is_stable(g, c)
    if not stable and schedule is not None:
        stable = feed(schedule.times, schedule.vertices)
        start = schedule.horizon
    if not stable:
        clocks = _PoissonClocks(g.n, _rng(seed), start=start)
        while not stable:
            if applied > max_events:
                raise FlipBudgetExceeded(f"not stable after {applied} events")
            t, v = clocks.block(math.floor(clocks.now) + 1.0)
            stable = feed(t, v)

    flip_v = np.concatenate(fv) if fv else np.zeros(0, dtype=np.int64)
    flip_t = np.concatenate(ft) if ft else np.zeros(0)
    times = np.concatenate(ev_t) if ev_t else np.zeros(0)
    verts = np.concatenate(ev_v) if ev_v else np.zeros(0, dtype=np.int64)
    t_cycle = float(flip_t[-1]) if len(flip_t) else 0.0
    sched = AsyncSchedule(times, verts, float(times[-1]) if len(times) else 0.0, seed)
    return Trajectory(
        model="async",
        initial=initial,
        final=c.copy(),
        t_cycle=t_cycle,
        flip_vertices=flip_v.astype(np.int64),
        flip_times=flip_t,
        events_applied=applied,
        schedule=sched,
    )


def run_async(g: Graph, c0, horizon: float, seed=None, schedule: AsyncSchedule | None = None) -> Trajectory:
    """Asynchronous run on ``[0, horizon]`` without stopping at stability."""
    c = as_config(c0, g.n).copy()
    initial = c.copy()
    if schedule is None:
        schedule = sample_async_schedule(g, horizon, seed)
    else:
        schedule = schedule.until(horizon)
    pos, _, stable = kernels.async_run(g.indptr, g.indices, c, schedule.vertices, False)
    flip_t = schedule.times[pos]
    return Trajectory(
        model="async",
        initial=initial,
        final=c.copy(),
        t_cycle=float(flip_t[-1]) if len(flip_t) else 0.0,
        flip_vertices=schedule.vertices[pos],
        flip_times=flip_t,
        events_applied=len(schedule),
        schedule=schedule,
        stable=bool(stable),
    )


def flip_counts(traj: Trajectory) -> np.ndarray:
    """Per-vertex counts: sync counts ``t >= 1`` with ``A_{t+1} != A_{t-1}``;
    async counts opinion changes."""
    if traj.model == "sync":
        h = traj.configs
        return (h[2:] != h[:-2]).sum(axis=0).astype(np.int64)
    return np.bincount(traj.flip_vertices, minlength=traj.n).astype(np.int64)


def count_flips(traj: Trajectory, i: int) -> int:
    return int(flip_counts(traj)[i])


def limit_opinions(traj: Trajectory) -> np.ndarray:
    """``Z = lim A_{2t}``: the configuration at the first even time past the cycle."""
    if traj.model == "sync":
        t = traj.t_cycle + (traj.t_cycle % 2)
        return traj.config_at(t)
    if not traj.stable:
        raise InvalidParams("asynchronous trajectory has not reached a fixed point")
    return traj.final.copy()


def light_cone(g: Graph, i: int, t: float, sched: AsyncSchedule | str | None = None) -> frozenset:
    """Past light cone of ``i`` at time ``t``.

    Synchronous (``sched`` None or ``"sync"``): the ball of radius ``t``.
    Asynchronous: replay the events up to ``t`` keeping every vertex's cone,
    starting from singletons and replacing an updated vertex's cone by the
    union over its neighbourhood.
    """
    if sched is None or isinstance(sched, str):
        return frozenset(int(v) for v in g.ball(i, int(t)))
    cones = [1 << v for v in range(g.n)]
    adj = g.adj_lists
    k = int(np.searchsorted(sched.times, t, side="right"))
    for v in sched.vertices[:k].tolist():
        acc = 0
        for j in adj[v]:
            acc |= cones[j]
        cones[v] = acc
    bits = cones[i]
    return frozenset(v for v in range(g.n) if bits >> v & 1)


def causally_connected(g: Graph, i: int, j: int, t: float, sched=None) -> bool:
    return not light_cone(g, i, t, sched).isdisjoint(light_cone(g, j, t, sched))


def local_opinion(g: Graph, c0, i: int, T: int) -> int:
    """``A^i_T`` computed only from the ball ``B(i, T)``.

    At step ``s`` only vertices within distance ``T - s`` are updated; their
    neighbourhoods lie inside the region still valid from the previous step,
    so the answer matches a whole-graph simulation exactly.
    """
    c0 = as_config(c0, g.n)
    dist = g.distances_from(i, cutoff=T)
    cur = {int(v): int(c0[v]) for v in np.flatnonzero(dist >= 0)}
    adj = g.adj_lists
    for s in range(1, T + 1):
        live = [v for v in cur if dist[v] <= T - s]
        cur = {v: (1 if sum(cur[j] for j in adj[v]) > 0 else -1) for v in live}
    return cur[i]
