"""State of the world, independent vertex sets, estimators and the
reconstruction error ``delta(G, p)``.

A hidden fair coin ``S`` is drawn; every vertex independently starts with
opinion ``S`` with probability ``p``.  The estimators try to recover ``S``
from the opinions at time 0, from opinions of well-separated vertices at a
finite time, or from the limit opinions ``Z``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.stats import fisher_exact

from . import kernels
from .dynamics import (
    AsyncSchedule,
    Trajectory,
    as_config,
    limit_opinions,
    run_async,
    run_async_until_stable,
    run_sync_until_cycle,
    sample_async_schedule,
)
from .errors import InsufficientTrials, InvalidP, InvalidParams, MissingData, WNotLargeEnough
from .graph import Graph, growth_moment

__all__ = [
    "WorldSample",
    "Estimator",
    "Estimate",
    "EstimatorResult",
    "CausalRadius",
    "RetentionBound",
    "trial_seed",
    "sample_world",
    "select_W",
    "causal_radius",
    "greedy_disjoint_balls",
    "representatives",
    "estimate",
    "run_trial",
    "monte_carlo_delta",
    "exact_delta",
    "retention_bound",
    "chernoff_bound",
    "empirical_q",
    "check_monotone_learning",
    "check_cesaro_bound",
]

THREE_SIGMA_TAIL = math.erfc(3 / math.sqrt(2))  # two-sided, about 0.0027

_TRANSITIVE = {"torus", "cycle", "triangle", "complete", "complete_bipartite", "circular_ladder"}


def trial_seed(seed, idx: int, *extra: int) -> np.random.SeedSequence:
    """Independent stream for trial ``idx`` of a run with master ``seed``."""
    return np.random.SeedSequence(seed, spawn_key=(idx, *extra))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_p(p):
    if not 0.5 < float(p) < 1:
        raise InvalidP(f"p must lie strictly between 1/2 and 1, got {p}")


def sigma(rate: float, trials: int) -> float:
    return math.sqrt(max(rate * (1 - rate), 0.0) / trials)


@dataclass
class WorldSample:
    S: int
    p: float
    config0: np.ndarray
    seed: object = None
    rng: np.random.Generator | None = field(default=None, repr=False, compare=False)


def sample_world(g: Graph | int, p: float, seed=None) -> WorldSample:
    """Draw ``S`` then each opinion, in that order, from one stream.

    The returned sample keeps the generator so later draws of the same trial
    (schedules, tie coins) continue the stream.
    """
    _check_p(p)
    n = g if isinstance(g, int) else g.n
    rng = _rng(seed)
    S = 1 if rng.random() < 0.5 else -1
    agree = rng.random(n) < float(p)
    c = np.where(agree, S, -S).astype(np.int8)
    return WorldSample(S, float(p), c, seed, rng)


def _balls_excluding_self(g: Graph, r: int):
    cache = g.__dict__.setdefault("_ball_cache", {})
    if r not in cache:
        D = g.distance_matrix
        rows, cols = np.nonzero((D <= r) & (D > 0))
        ptr = np.zeros(g.n + 1, dtype=np.int64)
        np.add.at(ptr, rows + 1, 1)
        cache[r] = (np.cumsum(ptr), cols)
    return cache[r]


def select_W(g: Graph, r: int, seed=None, marks=None) -> tuple:
    """Vertices whose exponential mark beats every other mark within distance ``r``."""
    if r < 0:
        raise InvalidParams("r must be >= 0")
    if marks is None:
        marks = _rng(seed).exponential(size=g.n)
    marks = np.asarray(marks, dtype=float)
    if len(marks) != g.n:
        raise InvalidParams("one mark per vertex is required")
    ptr, idx = _balls_excluding_self(g, int(r))
    other = np.full(g.n, np.inf)
    nonempty = np.flatnonzero(np.diff(ptr) > 0)
    if len(nonempty):
        mins = np.minimum.reduceat(marks[idx], ptr[:-1][nonempty])
        other[nonempty] = mins
    return tuple(np.flatnonzero(marks < other).tolist())


def greedy_disjoint_balls(g: Graph, radius: int) -> tuple:
    """Scan ids upwards, keeping ``i`` when ``B(i, radius)`` misses all kept balls."""
    if radius < 0:
        raise InvalidParams("radius must be >= 0")
    covered = np.zeros(g.n, dtype=bool)
    out = []
    for i in range(g.n):
        if covered[i]:
            continue
        ball = g.ball(i, radius)
        if not covered[ball].any():
            covered[ball] = True
            out.append(i)
    return tuple(out)


def representatives(g: Graph) -> list[int]:
    """One vertex per automorphism orbit for the known transitive families;
    every vertex otherwise."""
    if g.meta.get("kind") in _TRANSITIVE and g.has_loop.all() == g.has_loop.any():
        return [0]
    return list(range(g.n))


@dataclass
class CausalRadius:
    radius: int
    model: str
    t: float
    delta: float
    trials: int = 0
    tail: dict = field(default_factory=dict)
    sigma: dict = field(default_factory=dict)
    vertices: list = field(default_factory=list)
    confident: bool = True
    method: str = ""

    def __int__(self):
        return self.radius


def cone_radii(g: Graph, i: int, t: float, trials: int, seed) -> np.ndarray:
    """Graph radius around ``i`` of the asynchronous light cone, one per sampled schedule."""
    dist = g.distances_from(i)
    out = np.empty(trials, dtype=np.int64)
    for k in range(trials):
        sched = sample_async_schedule(g, t, trial_seed(seed, k))
        mask = kernels.cone_backward(g.indptr, g.indices, i, sched.vertices)
        out[k] = dist[mask].max()
    return out


def causal_radius(
    model: str,
    t: float,
    delta: float,
    g: Graph | None = None,
    trials: int = 2000,
    seed=0,
    strict: bool = True,
) -> CausalRadius:
    """Separation ``r`` such that vertices more than ``r`` apart are causally
    connected at time ``t`` with probability at most ``delta``.

    Synchronous cones are balls of radius ``t``, so ``2t`` is exact.
    Asynchronously, ``q`` is the smallest radius with estimated
    ``P(cone reaches beyond q) <= delta/2`` (maximised over orbit
    representatives) and ``r = 2q``: two cones can only meet if one of them
    reaches half-way, so a union bound over the two gives ``delta``.
    """
    if t < 0:
        raise InvalidParams("t must be >= 0")
    if not 0 < delta < 1:
        raise InvalidParams("delta must lie in (0, 1)")
    if model == "sync":
        return CausalRadius(2 * int(math.ceil(t)), model, t, delta, method="exact: cones are balls of radius t")
    if model != "async":
        raise InvalidParams(f"unknown model {model!r}")
    if t == 0:
        return CausalRadius(0, model, t, delta, method="exact: cones are singletons at t=0")
    if g is None:
        raise InvalidParams("the asynchronous radius needs a graph")
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    thr = delta / 2
    q_best, tails, sigmas, confident = 0, {}, {}, True
    reps = representatives(g)
    for i in reps:
        radii = cone_radii(g, i, t, trials, seed)
        top = int(radii.max())
        freq = {q: float(np.mean(radii > q)) for q in range(top + 1)}
        q = next(q for q in range(top + 1) if freq[q] <= thr)
        # the decision at q (accept) and q-1 (reject) should be clear of the noise
        for qq in (q - 1, q):
            if qq >= 0 and abs(freq[qq] - thr) <= 3 * sigma(freq[qq], trials):
                confident = False
        if q >= q_best:
            q_best = q
            tails = freq
            sigmas = {k: sigma(v, trials) for k, v in freq.items()}
    res = CausalRadius(
        2 * q_best, model, t, delta, trials, tails, sigmas, reps, confident,
        "monte carlo over sampled schedules; r = 2q with P(cone radius > q) <= delta/2; union bound over both cones",
    )
    if strict and not confident:
        raise InsufficientTrials(
            f"tail estimate within 3 sigma of delta/2 = {thr}; increase trials (currently {trials})"
        )
    return res


@dataclass(frozen=True)
class Estimator:
    """Which statistic to take the sign of.

    ``initial_majority``: all opinions at time 0.
    ``cone_majority``: the first ``n`` members (ascending id) of a W-set at
    time ``t``; ``W`` may be fixed or drawn fresh per trial with separation ``r``.
    ``limit_majority``: limit opinions over ``subset`` (all vertices when
    None; ``"bunker"`` selects greedy disjoint bunker balls).
    """

    kind: str
    W: tuple | None = None
    n: int | None = None
    t: float | None = None
    r: int | None = None
    subset: tuple | str | None = None

    def __post_init__(self):
        if self.kind not in ("initial_majority", "cone_majority", "limit_majority"):
            raise InvalidParams(f"unknown estimator {self.kind!r}")
        if self.kind == "cone_majority":
            if self.n is None or self.t is None or self.n < 1 or self.t < 0:
                raise InvalidParams("cone_majority needs n >= 1 and t >= 0")

    @classmethod
    def initial_majority(cls):
        return cls("initial_majority")

    @classmethod
    def cone_majority(cls, W=None, n=1, t=0, r=None):
        return cls("cone_majority", None if W is None else tuple(int(v) for v in W), n, t, r)

    @classmethod
    def limit_majority(cls, subset=None):
        if subset is not None and not isinstance(subset, str):
            subset = tuple(int(v) for v in subset)
        return cls("limit_majority", subset=subset)

    @property
    def name(self) -> str:
        if self.kind == "cone_majority":
            return f"cone_majority(n={self.n},t={self.t})"
        if self.kind == "limit_majority" and isinstance(self.subset, str):
            return f"limit_majority({self.subset})"
        return self.kind


class Estimate(NamedTuple):
    value: int
    tie: bool


def _sign_with_coin(total, rng) -> Estimate:
    if total > 0:
        return Estimate(1, False)
    if total < 0:
        return Estimate(-1, False)
    if rng is None:
        raise MissingData("a tie needs the run's random stream for the coin")
    return Estimate(1 if rng.random() < 0.5 else -1, True)


def _opinions_at(traj: Trajectory, t: float) -> np.ndarray:
    if traj.model == "sync":
        return traj.config_at(int(t))
    covered = traj.schedule is not None and traj.schedule.horizon >= t
    if not (covered or traj.stable):
        raise MissingData(f"trajectory does not cover time {t}")
    return traj.config_at(t)


def estimate(est: Estimator, world: WorldSample, traj: Trajectory | None = None, rng=None, W=None) -> Estimate:
    """Sign of the estimator's sum; a tie is settled by a coin from ``rng``
    (default: the world's stream)."""
    rng = world.rng if rng is None else rng
    if est.kind == "initial_majority":
        return _sign_with_coin(int(world.config0.astype(np.int64).sum()), rng)
    if traj is None:
        raise MissingData(f"{est.kind} needs a trajectory")
    if est.kind == "limit_majority":
        if traj.model == "async" and not traj.stable:
            raise MissingData("asynchronous trajectory has no limit yet")
        z = limit_opinions(traj)
        if est.subset is None:
            total = int(z.astype(np.int64).sum())
        elif isinstance(est.subset, str):
            raise MissingData("symbolic subsets are resolved against a graph first")
        else:
            total = int(z[list(est.subset)].astype(np.int64).sum())
        return _sign_with_coin(total, rng)
    W = est.W if W is None else W
    if W is None:
        raise MissingData("cone_majority needs a W set")
    members = sorted(W)[: est.n]
    if len(members) < est.n:
        raise WNotLargeEnough(f"|W| = {len(W)} < n = {est.n}")
    c = _opinions_at(traj, est.t)
    return _sign_with_coin(int(c[members].astype(np.int64).sum()), rng)


@dataclass
class RetentionBound:
    """Bunker-ball bookkeeping for the limit-majority bound on a finite graph."""

    r0: int | None
    radius: int
    I: tuple
    ball_size: int
    eta: Fraction
    p: Fraction

    @property
    def bound(self) -> float:
        return chernoff_bound(float(self.eta), len(self.I))


def chernoff_bound(eta: float, k: int) -> float:
    """``exp(-(eta - 1/2)^2 k / (2 eta))``."""
    return math.exp(-((eta - 0.5) ** 2) * k / (2 * eta)) if eta > 0 else 0.0


def retention_bound(g: Graph, p, d: int | None = None) -> RetentionBound:
    """``r0`` from the graph's own sphere profile (largest over representatives),
    balls of radius ``r0 + 2``, greedy disjoint centres ``I`` and
    ``eta = p^max|B_0|`` computed exactly."""
    p = Fraction(str(p)) if isinstance(p, float) else Fraction(p)
    r0s = [growth_moment(g, i, d).r0 for i in representatives(g)]
    r0 = None if any(r is None for r in r0s) else max(r0s)
    radius = (r0 if r0 is not None else g.diameter) + 2
    I = greedy_disjoint_balls(g, radius)
    size = max(len(g.ball(i, radius)) for i in I)
    return RetentionBound(r0, radius, I, size, p**size, p)


def _resolve(est: Estimator, g: Graph, p) -> tuple[Estimator, dict]:
    if est.kind == "limit_majority" and est.subset == "bunker":
        rb = retention_bound(g, p)
        info = {
            "r0": rb.r0,
            "ball_radius": rb.radius,
            "I_size": len(rb.I),
            "ball_size": rb.ball_size,
            "eta": float(rb.eta),
            "bound": rb.bound,
        }
        return Estimator("limit_majority", subset=rb.I), info
    if est.kind == "limit_majority" and isinstance(est.subset, str):
        raise InvalidParams(f"unknown subset {est.subset!r}")
    return est, {}


def run_trial(g: Graph, p, est: Estimator, model: str, seed, max_redraws: int = 100) -> tuple[WorldSample, Estimate]:
    """One draw of the world, the dynamics needed by ``est``, and the estimate."""
    world = sample_world(g, p, seed)
    rng = world.rng
    if est.kind == "initial_majority":
        return world, estimate(est, world)
    W = None
    if est.kind == "cone_majority" and est.W is None:
        r = est.r if est.r is not None else 2 * int(math.ceil(est.t))
        for _ in range(max_redraws):
            W = select_W(g, r, rng)
            if len(W) >= est.n:
                break
        else:
            raise WNotLargeEnough(f"|W| < {est.n} after {max_redraws} draws of the marks")
    if model == "sync":
        if est.kind == "cone_majority":
            hist = [world.config0]
            for _ in range(int(est.t)):
                hist.append(kernels.sync_step(g.indptr, g.indices, hist[-1]))
            traj = Trajectory("sync", world.config0, hist[-1], -1, configs=np.array(hist))
        else:
            traj = run_sync_until_cycle(g, world.config0)
    elif model == "async":
        if est.kind == "cone_majority":
            traj = _async_upto(g, world.config0, est.t, rng)
        else:
            traj = run_async_until_stable(g, world.config0, seed=rng)
    else:
        raise InvalidParams(f"unknown model {model!r}")
    return world, estimate(est, world, traj, rng, W)


def _async_upto(g: Graph, c0, t: float, rng) -> Trajectory:
    if t > 0:
        return run_async(g, c0, t, seed=rng)
    c0 = as_config(c0, g.n)
    empty = AsyncSchedule(np.zeros(0), np.zeros(0, dtype=np.int64), 0.0)
    return Trajectory("async", c0.copy(), c0.copy(), 0.0, schedule=empty, stable=False)


@dataclass
class EstimatorResult:
    estimator: str
    trials: int
    errors: int
    tie_count: int
    p: float = 0.0
    model: str = "sync"
    graph: str = ""
    seed: object = None
    info: dict = field(default_factory=dict)

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def sigma(self) -> float:
        return sigma(self.error_rate, self.trials)

    @property
    def ci(self) -> float:
        """Three-sigma normal-approximation radius."""
        return 3 * self.sigma

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "p": self.p,
            "model": self.model,
            "estimator": self.estimator,
            "trials": self.trials,
            "errors": self.errors,
            "error_rate": self.error_rate,
            "ci": self.ci,
            "ties": self.tie_count,
            "seed": self.seed,
            "info": self.info,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=str)

    CSV_HEADER = ("graph", "p", "estimator", "trials", "errors", "rate", "ci", "ties")

    def csv_row(self) -> list:
        return [self.graph, self.p, self.estimator, self.trials, self.errors,
                repr(self.error_rate), repr(self.ci), self.tie_count]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        w.writerow(self.csv_row())
        return buf.getvalue()


def _graph_id(g: Graph) -> str:
    return f"{g.meta.get('kind', 'graph')}(n={g.n},m={g.m})"


def monte_carlo_delta(
    g: Graph | Callable[[np.random.SeedSequence], Graph],
    p: float,
    est: Estimator | str = "limit_majority",
    trials: int = 1000,
    seed=0,
    model: str = "sync",
) -> EstimatorResult:
    """Repeat world -> dynamics -> estimate with per-trial streams.

    ``g`` may be a factory taking a seed sequence, in which case a fresh
    graph is built for every trial from its own stream.
    """
    _check_p(p)
    if trials < 1:
        raise InvalidParams("trials must be >= 1")
    if isinstance(est, str):
        est = Estimator(est)
    factory = None if isinstance(g, Graph) else g
    info: dict = {}
    if factory is None:
        est_r, info = _resolve(est, g, p)
        gid = _graph_id(g)
    errors = ties = 0
    for k in range(trials):
        if factory is not None:
            gk = factory(trial_seed(seed, k, 1))
            est_r, info_k = _resolve(est, gk, p)
            if k == 0:
                info = dict(info_k)
                gid = f"{gk.meta.get('kind', 'graph')}*"
                if "stand_in" in gk.meta:
                    info["stand_in"] = gk.meta["stand_in"]
        else:
            gk = g
        world, e = run_trial(gk, p, est_r, model, trial_seed(seed, k))
        errors += e.value != world.S
        ties += e.tie
    if factory is None and "stand_in" in g.meta:
        info["stand_in"] = g.meta["stand_in"]
    return EstimatorResult(est.name, trials, int(errors), int(ties), float(p), model, gid, seed, info)


def _deterministic_sign(total) -> Fraction | int:
    return 1 if total > 0 else (-1 if total < 0 else 0)


def exact_delta(g: Graph, p, est: Estimator | str = "limit_majority", max_bits: int = 12):
    """Error probability by enumerating every ``(S, A_0)``; synchronous model.

    Returns a Fraction when ``p`` is rational (int, Fraction or decimal
    string), a float otherwise.  A tie counts as half an error.
    """
    if g.n > max_bits:
        raise InvalidParams(f"enumeration is limited to {max_bits} vertices")
    if isinstance(est, str):
        est = Estimator(est)
    _check_p(float(p))
    exact = isinstance(p, (Fraction, str, int))
    pv = Fraction(p) if exact else float(p)
    est, _ = _resolve(est, g, p)
    if est.kind == "cone_majority" and est.W is None:
        raise InvalidParams("enumeration needs a fixed W")
    total = Fraction(0) if exact else 0.0
    for bits in itertools.product((1, -1), repeat=g.n):
        c = np.array(bits, dtype=np.int8)
        agree = int((c == 1).sum())
        # S = +1 sees `agree` correct opinions; S = -1 is the mirror image
        w_plus = pv**agree * (1 - pv) ** (g.n - agree)
        w_minus = pv ** (g.n - agree) * (1 - pv) ** agree
        if est.kind == "initial_majority":
            s = _deterministic_sign(int(c.astype(np.int64).sum()))
        else:
            traj = run_sync_until_cycle(g, c)
            if est.kind == "limit_majority":
                z = limit_opinions(traj)
                sel = z if est.subset is None else z[list(est.subset)]
            else:
                sel = traj.config_at(int(est.t))[sorted(est.W)[: est.n]]
            s = _deterministic_sign(int(sel.astype(np.int64).sum()))
        half = Fraction(1, 2) if exact else 0.5
        err_plus = 1 if s == -1 else (half if s == 0 else 0)
        err_minus = 1 if s == 1 else (half if s == 0 else 0)
        total += (w_plus * err_plus + w_minus * err_minus) / 2
    return total


@dataclass
class QReport:
    t_values: list
    vertices: list
    q: dict
    trials: int

    @property
    def decreasing(self) -> bool:
        """Weakly decreasing in ``t`` at every vertex, up to 3 sigma."""
        ts = sorted(self.t_values)
        for a, b in zip(ts, ts[1:]):
            qa, qb = self.q[a], self.q[b]
            slack = 3 * np.sqrt((qa * (1 - qa) + qb * (1 - qb)) / self.trials)
            if np.any(qb > qa + slack):
                return False
        return True


def empirical_q(g: Graph, p, t_values: Sequence[int], trials: int, seed=0, vertices=None) -> QReport:
    """Frequency of ``Z^i != A^i_{2t}`` per representative vertex (sync)."""
    _check_p(p)
    vertices = representatives(g) if vertices is None else list(vertices)
    counts = {t: np.zeros(len(vertices)) for t in t_values}
    for k in range(trials):
        world = sample_world(g, p, trial_seed(seed, k))
        traj = run_sync_until_cycle(g, world.config0)
        z = limit_opinions(traj)[vertices]
        for t in t_values:
            counts[t] += traj.config_at(2 * int(t))[vertices] != z
    return QReport(list(t_values), vertices, {t: c / trials for t, c in counts.items()}, trials)


@dataclass
class LearningReport:
    model: str
    p: float
    trials: int
    t_values: list
    rates: dict

    @property
    def sigma(self) -> float:
        return sigma(self.p, self.trials)

    @property
    def worst(self) -> tuple:
        t, v, r = min(
            ((t, int(np.argmin(r)), float(np.min(r))) for t, r in self.rates.items()), key=lambda x: x[2]
        )
        return t, v, r

    @property
    def passed(self) -> bool:
        return self.worst[2] >= self.p - 3 * self.sigma


def check_monotone_learning(
    g: Graph, p, t_values: Sequence[float], trials: int, seed=0, model: str = "sync"
) -> LearningReport:
    """Empirical ``P(A^i_t = S)`` per vertex and time; each should be at least ``p``."""
    _check_p(p)
    hits = {t: np.zeros(g.n) for t in t_values}
    horizon = max(t_values)
    for k in range(trials):
        world = sample_world(g, p, trial_seed(seed, k))
        if model == "sync":
            traj = run_sync_until_cycle(g, world.config0)
        elif model == "async":
            traj = _async_upto(g, world.config0, horizon, world.rng)
        else:
            raise InvalidParams(f"unknown model {model!r}")
        for t in t_values:
            hits[t] += traj.config_at(t) == world.S
    return LearningReport(model, float(p), trials, list(t_values), {t: h / trials for t, h in hits.items()})


@dataclass
class CesaroReport:
    model: str
    p: float
    t: float
    n: int
    r: int
    delta: float
    trials: int
    errors: int
    bound: float
    corr: np.ndarray
    redraws: int
    indicators: np.ndarray = field(repr=False, default=None)

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def slack(self) -> float:
        return 3 * sigma(self.error_rate, self.trials)

    @property
    def passed(self) -> bool:
        return self.error_rate <= self.bound + self.slack

    @property
    def corr_sigma(self) -> float:
        return 1 / math.sqrt(self.trials)

    def _pairs(self):
        return list(zip(*np.triu_indices(self.n, 1)))

    @property
    def max_abs_corr(self) -> float:
        vals = [abs(self.corr[i, j]) for i, j in self._pairs()]
        vals = [v for v in vals if not math.isnan(v)]
        return max(vals, default=0.0)

    @property
    def pooled_corr(self) -> float:
        """Mean pairwise correlation; its null standard deviation is ``1/sqrt(trials * pairs)``."""
        vals = [self.corr[i, j] for i, j in self._pairs()]
        vals = [v for v in vals if not math.isnan(v)]
        return float(np.mean(vals)) if vals else 0.0

    @property
    def pair_pvalues(self) -> np.ndarray:
        """Two-sided Fisher exact p-value of each pair's 2x2 indicator table."""
        out = []
        x = self.indicators
        for i, j in self._pairs():
            a, b = x[:, i], x[:, j]
            table = [[int(np.sum(a & b)), int(np.sum(a & ~b))], [int(np.sum(~a & b)), int(np.sum(~a & ~b))]]
            out.append(fisher_exact(table)[1])
        return np.array(out)

    @property
    def independent(self) -> bool:
        """No pair rejects independence at the 3-sigma level, Bonferroni over all pairs.

        The indicators are rare events here, so the normal approximation to a
        single correlation coefficient is unreliable in the tail; the exact
        test keeps the family-wise false-alarm rate at the two-sided 3-sigma
        level (0.27%).
        """
        pv = self.pair_pvalues
        return bool(len(pv) == 0 or pv.min() * len(pv) >= THREE_SIGMA_TAIL)


def check_cesaro_bound(
    g: Graph,
    p,
    t: float,
    delta: float,
    n: int,
    trials: int,
    seed=0,
    model: str = "sync",
    r: int | None = None,
    max_redraws: int = 100,
) -> CesaroReport:
    """Error of ``cone_majority`` against ``exp(-(p-1/2)^2 n/(2p)) + n^2 delta``.

    ``W`` is drawn fresh per trial with separation ``r`` (``2t`` in the
    synchronous model; supply the causal radius for the asynchronous one).
    Marks are redrawn when ``|W| < n``; they are independent of the opinions.
    Also records the correlation matrix of the indicators ``A^{i_k}_t = S``.
    """
    _check_p(p)
    if not 0 <= delta < 1:
        raise InvalidParams("delta must lie in [0, 1)")
    if r is None:
        if model != "sync":
            raise InvalidParams("the asynchronous check needs the causal radius r")
        r = 2 * int(math.ceil(t))  # synchronous cones are balls of radius t
    est = Estimator.cone_majority(n=n, t=t, r=r)
    bound = math.exp(-((float(p) - 0.5) ** 2) * n / (2 * float(p))) + n * n * delta
    ind = np.zeros((trials, n), dtype=bool)
    errors = redraws = 0
    for k in range(trials):
        world = sample_world(g, p, trial_seed(seed, k))
        rng = world.rng
        for attempt in range(max_redraws):
            W = select_W(g, r, rng)
            if len(W) >= n:
                break
            redraws += 1
        else:
            raise WNotLargeEnough(f"|W| < {n} after {max_redraws} draws of the marks")
        if model == "sync":
            c = world.config0
            for _ in range(int(t)):
                c = kernels.sync_step(g.indptr, g.indices, c)
        else:
            c = _async_upto(g, world.config0, t, rng).final
        members = list(W[:n])
        ind[k] = c[members] == world.S
        e = _sign_with_coin(int(c[members].astype(np.int64).sum()), rng)
        errors += e.value != world.S
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(ind, rowvar=False) if n > 1 else np.ones((1, 1))
    return CesaroReport(model, float(p), t, n, r, delta, trials, int(errors), bound, corr, redraws, ind)
