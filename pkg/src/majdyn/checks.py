"""Randomised theorem checks shared by the ``verify`` command and the test suite.

Each suite returns a ``CheckReport`` with pass counts per check, summary
statistics and the first counterexample found (if any).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    Trajectory,
    flip_counts,
    is_stable,
    run_async_until_stable,
    run_sync_until_cycle,
)
from .errors import TheoremViolation
from .graph import (
    Graph,
    circular_ladder,
    complete_graph,
    gen_gadget_graph,
    gen_random_odd_graph,
    growth_moment,
    theorem_degree,
)
from .lyapunov import energy_report, make_weighting, monopoly_flip_budget
from .retention import trial_seed

__all__ = [
    "CheckReport",
    "gadget_stabilization",
    "default_gadget_graphs",
    "verify_period",
    "verify_flips",
    "verify_bunker",
    "verify_lyapunov",
    "verify_monopoly",
    "verify_gadget",
]


@dataclass
class CheckReport:
    suite: str
    counts: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    counterexample: dict | None = None

    def record(self, name: str, ok: bool, example: dict | None = None):
        passed, total = self.counts.get(name, (0, 0))
        self.counts[name] = (passed + bool(ok), total + 1)
        if not ok and self.counterexample is None:
            self.counterexample = {"check": name, **(example or {})}

    def stat_max(self, name: str, value: float):
        self.stats[name] = max(self.stats.get(name, value), value)

    @property
    def passed(self) -> bool:
        return all(p == t for p, t in self.counts.values())

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "counts": {k: {"passed": p, "total": t} for k, (p, t) in self.counts.items()},
            "stats": self.stats,
            "counterexample": self.counterexample,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable)

    def summary(self) -> str:
        parts = [f"{k} {p}/{t}" for k, (p, t) in self.counts.items()]
        return f"{self.suite}: {'PASS' if self.passed else 'FAIL'} ({', '.join(parts)})"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return str(x)


def _random_config(rng, n):
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=n)


def _random_graph(rng, max_n, d_choices, min_n=3):
    n = int(rng.integers(min_n, max_n + 1))
    d_max = int(rng.choice(d_choices))
    return gen_random_odd_graph(n, d_max, rng)


def verify_period(trials: int = 1000, seed=0, models=("sync", "async"), max_n: int = 200,
                  d_choices=(3, 5, 7)) -> CheckReport:
    """Random connected odd-degree graphs: the synchronous run reaches
    ``A_{t+2} = A_t``; the asynchronous run reaches a fixed point within
    the per-vertex flip budget."""
    rep = CheckReport("period")
    for k in range(trials):
        rng = np.random.default_rng(trial_seed(seed, k))
        g = _random_graph(rng, max_n, d_choices)
        c = _random_config(rng, g.n)
        ex = {"trial": k, "n": g.n, "edges": g.edges.tolist(), "config": c.tolist()}
        if "sync" in models:
            try:
                tr = run_sync_until_cycle(g, c)
                ok = tr.period in (1, 2)
                rep.stat_max("max_t_cycle_sync", tr.t_cycle)
            except TheoremViolation as exc:
                ok, ex = False, {**ex, "error": str(exc)}
            rep.record("sync_period_le_2", ok, ex)
        if "async" in models:
            try:
                tr = run_async_until_stable(g, c, seed=rng)
                ok = is_stable(g, tr.final)
            except TheoremViolation as exc:
                ok, ex = False, {**ex, "error": str(exc)}
            rep.record("async_stable_within_budget", ok, ex)
    return rep


def verify_flips(graphs: list[Graph], trials: int = 500, seed=0, models=("sync", "async")) -> CheckReport:
    """Per-vertex flip counts against ``a d M_d(G, i)`` (sync) and twice that (async)."""
    rep = CheckReport("flips")
    for gi, g in enumerate(graphs):
        d = theorem_degree(g)
        a = (d + 1) / (d - 1)
        bound = a * d * g.growth_moments(d)
        tol = 1e-9
        for k in range(trials):
            rng = np.random.default_rng(trial_seed(seed, gi, k))
            c = _random_config(rng, g.n)
            ex = {"graph": repr(g), "trial": k, "config": c.tolist()}
            if "sync" in models:
                f = flip_counts(run_sync_until_cycle(g, c))
                rep.stat_max(f"{g.meta.get('kind')}_sync_max_ratio", float(np.max(f / bound)))
                rep.record("sync_flips", bool(np.all(f <= bound + tol)), ex)
            if "async" in models:
                # generous run budget; the theorem bound is checked afterwards
                tr = run_async_until_stable(g, c, seed=rng, budgets=20 * bound)
                f = flip_counts(tr)
                rep.stat_max(f"{g.meta.get('kind')}_async_max_ratio", float(np.max(f / (2 * bound))))
                rep.record("async_flips", bool(np.all(f <= 2 * bound + tol)), ex)
    return rep


def verify_bunker(g: Graph, i: int | None = None, trials: int = 500, seed=0,
                  models=("sync", "async")) -> CheckReport:
    """Force ``B(i, r0 + 2)`` to agree; the centre must never change opinion."""
    i = g.n // 2 if i is None else i
    prof = growth_moment(g, i)
    rep = CheckReport("bunker", stats={"vertex": i, "r0": prof.r0})
    if prof.r0 is None:
        rep.record("r0_certified", False, {"vertex": i})
        return rep
    ball = g.ball(i, prof.bunker_radius)
    rep.stats["ball_radius"] = prof.bunker_radius
    for k in range(trials):
        rng = np.random.default_rng(trial_seed(seed, k))
        s = 1 if rng.random() < 0.5 else -1
        c = _random_config(rng, g.n)
        c[ball] = s
        ex = {"trial": k, "config": c.tolist()}
        if "sync" in models:
            tr = run_sync_until_cycle(g, c)
            rep.record("sync_center_fixed", bool(np.all(tr.configs[:, i] == s)), ex)
        if "async" in models:
            tr = run_async_until_stable(g, c, seed=rng)
            rep.record("async_center_fixed", int(np.sum(tr.flip_vertices == i)) == 0, ex)
    return rep


def verify_lyapunov(sync_runs: int = 1000, async_runs: int = 500, exact_runs: int = 50, seed=0,
                    max_n: int = 40, d_choices=(3, 5, 7), tol: float = 1e-9) -> CheckReport:
    """Drop identity, monotonicity and non-negative drops along random runs.

    The first ``exact_runs`` runs of each model are repeated in rational
    arithmetic, where the residual must vanish exactly.
    """
    rep = CheckReport("lyapunov", stats={"max_residual": 0.0})
    plan = [("sync", k) for k in range(sync_runs)] + [("async", k) for k in range(async_runs)]
    exact_left = {"sync": (exact_runs + 1) // 2, "async": exact_runs // 2}
    for model, k in plan:
        rng = np.random.default_rng(trial_seed(seed, 0 if model == "sync" else 1, k))
        g = _random_graph(rng, max_n, d_choices)
        z = make_weighting(g, int(rng.integers(g.n)))
        c = _random_config(rng, g.n)
        tr = run_sync_until_cycle(g, c) if model == "sync" else run_async_until_stable(g, c, seed=rng)
        ex = {"model": model, "trial": k, "edges": g.edges.tolist(), "config": c.tolist()}
        r = energy_report(g, z, tr)
        rep.stat_max("max_residual", float(r.max_residual))
        rep.record(f"{model}_identity", r.max_residual <= tol, ex)
        rep.record(f"{model}_monotone", r.monotone, ex)
        rep.record(f"{model}_drop_nonnegative", r.min_J >= -tol, ex)
        if exact_left[model] > 0:
            exact_left[model] -= 1
            re = energy_report(g, z, tr, exact=True)
            rep.record("exact_identity", re.max_residual == 0, ex)
            rep.record("exact_monotone", re.monotone and re.min_J >= 0, ex)
    return rep


def _monopoly_seed(g: Graph, kind: str, rng) -> list[int]:
    rows, cols = g.meta["params"]["rows"], g.meta["params"]["cols"]
    r, c = int(rng.integers(rows)), int(rng.integers(cols))
    if kind == "1":
        return [r * cols + c]
    if kind == "5":
        return [r * cols + (c + j) % cols for j in range(5)]
    if kind == "row":
        return [r * cols + j for j in range(cols)]
    raise ValueError(kind)


def verify_monopoly(g: Graph, trials: int = 100, seed=0, kinds=("1", "5", "row")) -> CheckReport:
    """Unit weights, ``+1`` on a patch ``W``: events with ``A_{t+1} != A_{t-1}``
    total at most ``L_0``, counted in integers."""
    rep = CheckReport("monopoly")
    for ki, kind in enumerate(kinds):
        for k in range(trials):
            rng = np.random.default_rng(trial_seed(seed, ki, k))
            W = _monopoly_seed(g, kind, rng)
            out = monopoly_flip_budget(g, W).check()
            rep.stat_max(f"W{kind}_max_events", out.events)
            rep.stat_max(f"W{kind}_max_L0", out.L0)
            rep.record(f"W{kind}_events_le_L0", out.ok, {"W": W, "events": out.events, "L0": out.L0})
    return rep


def gadget_stabilization(g: Graph, traj: Trajectory) -> list[int | None]:
    """Per gadget copy: first time from which both sides are unanimous and the
    copy repeats with period at most two (None if never, within the run)."""
    last = traj.t_cycle + 2
    hist = np.array([traj.config_at(t) for t in range(last + 3)])
    out = []
    for gd in g.meta.get("gadgets", []):
        A, B = gd["A"], gd["B"]
        H = A + B
        found = None
        for s in range(last + 1):
            sides = all(len(set(hist[t, A])) == 1 and len(set(hist[t, B])) == 1 for t in range(s, last + 1))
            periodic = all(np.array_equal(hist[t + 2, H], hist[t, H]) for t in range(s, last + 1))
            if sides and periodic:
                found = s
                break
        out.append(found)
    return out


def default_gadget_graphs() -> list[Graph]:
    """``K_4`` with one edge replaced, and the 16-vertex prism with every rung replaced."""
    k4 = gen_gadget_graph(complete_graph(4), [(0, 1)])
    ladder = circular_ladder(8)
    rungs = [(i, 8 + i) for i in range(8)]
    return [k4, gen_gadget_graph(ladder, rungs)]


def verify_gadget(graphs: list[Graph] | None = None, trials: int = 200, seed=0) -> CheckReport:
    """Each gadget copy is side-unanimous by ``t = 2``; the whole graph reaches period <= 2."""
    graphs = default_gadget_graphs() if graphs is None else graphs
    rep = CheckReport("gadget")
    for gi, g in enumerate(graphs):
        for k in range(trials):
            rng = np.random.default_rng(trial_seed(seed, gi, k))
            c = _random_config(rng, g.n)
            ex = {"graph": repr(g), "trial": k, "config": c.tolist()}
            try:
                tr = run_sync_until_cycle(g, c)
            except TheoremViolation as exc:
                rep.record("period_le_2", False, {**ex, "error": str(exc)})
                continue
            rep.record("period_le_2", tr.period in (1, 2), ex)
            c2 = tr.config_at(2)
            sides = all(
                len(set(c2[gd["A"]].tolist())) == 1 and len(set(c2[gd["B"]].tolist())) == 1
                for gd in g.meta["gadgets"]
            )
            rep.record("sides_unanimous_at_2", sides, ex)
            times = gadget_stabilization(g, tr)
            worst = max((t if t is not None else 10**9) for t in times)
            rep.stat_max("max_stabilization_time", worst)
            rep.record("copies_stable_by_2", worst <= 2, ex)
    return rep
