"""Experiment configuration, reproducible output directories and the command
implementations behind the CLI.

A configuration (JSON or TOML) is validated against ``SCHEMA`` and turned into
an ``ExperimentSpec``.  The spec's canonical JSON form is hashed to name the
output directory, and a manifest with the full spec is written next to the
results so any run can be replayed with ``--config <dir>/manifest.json``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from . import checks, graph as gr, kernels
from .dynamics import run_async_until_stable, run_sync_until_cycle
from .errors import MajDynError, TheoremViolation, ValidationError
from .lyapunov import constant_weighting, energy_report, make_weighting
from .retention import Estimator, EstimatorResult, monte_carlo_delta, sample_world, trial_seed

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "SCHEMA",
    "ExperimentSpec",
    "load_config",
    "spec_from_dict",
    "build_graph_from_spec",
    "cmd_simulate",
    "cmd_verify",
    "cmd_estimate",
    "cmd_sweep",
    "cmd_gadget_demo",
    "EXIT_OK",
    "EXIT_VALIDATION",
    "EXIT_THEOREM",
]

EXIT_OK, EXIT_VALIDATION, EXIT_THEOREM = 0, 2, 3
MANIFEST_VERSION = 1
SUITES = ("period", "flips", "bunker", "lyapunov", "monopoly", "gadget")
GENERATORS = (
    "path", "cycle", "torus", "tree_ball", "triangle", "complete", "complete_bipartite",
    "circular_ladder", "random_odd", "gadget", "percolation",
)

_graph_schema = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"generator": {"enum": list(GENERATORS)}, "params": {"type": "object"}},
            "required": ["generator"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"file": {"type": "string"}},
            "required": ["file"],
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "graph": _graph_schema,
        "model": {"enum": ["sync", "async"]},
        "p": {"type": "number", "exclusiveMinimum": 0.5, "exclusiveMaximum": 1},
        "estimator": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["initial_majority", "cone_majority", "limit_majority"]},
                "n": {"type": "integer", "minimum": 1},
                "t": {"type": "number", "minimum": 0},
                "r": {"type": "integer", "minimum": 0},
                "W": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "subset": {
                    "oneOf": [
                        {"enum": ["bunker"]},
                        {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    ]
                },
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "trials": {"type": "integer", "minimum": 1},
        "t": {"type": "number", "minimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "n": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "out": {"type": "string"},
        "mode": {"enum": ["float", "rational"]},
        "suite": {"enum": list(SUITES)},
        "vertex": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "grid": {"type": "object", "additionalProperties": {"type": "array"}},
    },
}


@dataclass(frozen=True)
class ExperimentSpec:
    graph: dict | None = None
    model: str = "sync"
    p: float = 0.9
    estimator: dict = field(default_factory=lambda: {"kind": "limit_majority"})
    trials: int = 100
    t: float | None = None
    delta: float | None = None
    n: int | None = None
    seed: int = 0
    out: str = "runs"
    mode: str = "float"
    suite: str | None = None
    vertex: int | None = None
    workers: int = 1
    grid: dict | None = None

    def canonical(self) -> dict:
        """Everything that determines the results; ``out`` and ``workers`` do not."""
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return {k: v for k, v in d.items() if v is not None}

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def output_dir(self, command: str) -> Path:
        return Path(self.out) / f"{command}-{self.digest()}"

    def estimator_obj(self) -> Estimator:
        e = dict(self.estimator)
        kind = e.pop("kind")
        if kind == "initial_majority":
            return Estimator.initial_majority()
        if kind == "limit_majority":
            return Estimator.limit_majority(e.get("subset"))
        return Estimator.cone_majority(e.get("W"), e.get("n", self.n or 1), e.get("t", self.t or 0), e.get("r"))


def _validate(data: dict):
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(x) for x in exc.absolute_path) or "config"
        raise ValidationError(f"{where}: {exc.message}") from None


def spec_from_dict(data: dict, **overrides) -> ExperimentSpec:
    """Validate, apply command-line overrides (``None`` means absent), build the spec."""
    data = dict(data)
    data.update({k: v for k, v in overrides.items() if v is not None})
    _validate(data)
    return ExperimentSpec(**data)


def load_config(path) -> dict:
    """Read JSON or TOML; a manifest yields the spec it recorded."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix == ".toml":
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ValidationError(f"cannot parse config {path}: {exc}") from None
    if isinstance(data, dict) and "manifest_version" in data:
        data = data["spec"]
    if not isinstance(data, dict):
        raise ValidationError("config must be a mapping")
    return data


def build_graph_from_spec(gs: dict) -> gr.Graph:
    if "file" in gs:
        try:
            return gr.read_graph(Path(gs["file"]).read_text())
        except OSError as exc:
            raise ValidationError(f"graph.file: {exc}") from None
    kind = gs["generator"]
    p = dict(gs.get("params", {}))
    try:
        if kind in ("path", "cycle", "torus", "tree_ball"):
            return gr.gen_lattice_family(kind, **p)
        if kind == "triangle":
            return gr.triangle_with_loops()
        if kind == "complete":
            return gr.complete_graph(p["n"])
        if kind == "complete_bipartite":
            return gr.complete_bipartite(p["d"])
        if kind == "circular_ladder":
            return gr.circular_ladder(p["k"])
        if kind == "random_odd":
            rng = np.random.default_rng(p.get("seed", 0))
            return gr.gen_random_odd_graph(p["n"], p.get("d_max", 3), rng, p.get("extra", 0.5))
        if kind == "gadget":
            base = build_graph_from_spec(p.get("base", {"generator": "complete", "params": {"n": 4}}))
            F = p.get("F", [[0, 1]])
            return gr.gen_gadget_graph(base, [tuple(e) for e in F], p.get("max_component"))
        if kind == "percolation":
            base = build_graph_from_spec(p.get("base", {"generator": "torus", "params": {"rows": 30}}))
            return gr.gen_percolation_subgraph(base, p.get("q", 0.8), p.get("seed", 0))
    except KeyError as exc:
        raise ValidationError(f"graph.params: {kind} requires {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ValidationError(f"graph.params: {exc}") from None
    raise ValidationError(f"graph.generator: unknown generator {kind!r}")


# output helpers


def _write(outdir: Path, name: str, text: str):
    (outdir / name).write_text(text)


def _prepare(spec: ExperimentSpec, command: str) -> Path:
    outdir = spec.output_dir(command)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _manifest(outdir: Path, spec: ExperimentSpec, command: str, files: list[str], extra: dict | None = None):
    data = {
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "digest": spec.digest(),
        "spec": {k: v for k, v in asdict(spec).items() if v is not None and k != "out"},
        "trial_seeds": "SeedSequence(seed, spawn_key=(trial,))",
        "files": sorted(files),
        **(extra or {}),
    }
    _write(outdir, "manifest.json", json.dumps(data, sort_keys=True, indent=2) + "\n")


@dataclass
class CommandResult:
    exit_code: int
    outdir: Path | None
    summary: dict

    def __iter__(self):
        return iter((self.exit_code, self.outdir))


# commands


def cmd_simulate(spec: ExperimentSpec) -> CommandResult:
    """Run ``trials`` trajectories from worlds drawn at ``p``; one JSON and one
    flip-log CSV per trajectory plus a summary."""
    g = build_graph_from_spec(spec.graph or DEFAULT_GRAPH)
    exact = spec.mode == "rational"
    outdir = _prepare(spec, "simulate")
    files, runs = [], []
    status = EXIT_OK
    for k in range(spec.trials):
        world = sample_world(g, spec.p, trial_seed(spec.seed, k))
        try:
            if spec.model == "sync":
                tr = run_sync_until_cycle(g, world.config0)
            else:
                tr = run_async_until_stable(g, world.config0, seed=world.rng)
        except TheoremViolation as exc:
            runs.append({"trial": k, "error": f"{type(exc).__name__}: {exc}"})
            status = EXIT_THEOREM
            continue
        z = make_weighting(g, 0) if g.n > 1 else constant_weighting(g)
        rep = energy_report(g, z, tr, exact=exact)
        row = {
            "trial": k,
            "S": world.S,
            "t_cycle": tr.t_cycle,
            "period": tr.period,
            "flips": len(tr.flip_vertices),
            "L0": str(rep.L_values[0]) if exact else rep.L_values[0],
            "lyapunov_monotone": rep.monotone,
            "max_residual": str(rep.max_residual) if exact else rep.max_residual,
        }
        if spec.model == "sync":
            row["horizon"] = g.m + 3
        if g.meta.get("gadgets"):
            times = checks.gadget_stabilization(g, tr) if spec.model == "sync" else []
            row["gadget_stabilization"] = times
            if spec.model == "sync" and any(t is None or t > 2 for t in times):
                status = EXIT_THEOREM
        if not rep.monotone:
            status = EXIT_THEOREM
        runs.append(row)
        _write(outdir, f"trajectory_{k}.json", tr.to_json() + "\n")
        _write(outdir, f"flips_{k}.csv", tr.flip_log_csv())
        _write(outdir, f"energy_{k}.csv", rep.to_csv())
        files += [f"trajectory_{k}.json", f"flips_{k}.csv", f"energy_{k}.csv"]
    summary = {"graph": repr(g), "model": spec.model, "runs": runs, "ok": status == EXIT_OK}
    _write(outdir, "summary.json", json.dumps(summary, sort_keys=True, indent=2, default=str) + "\n")
    _manifest(outdir, spec, "simulate", files + ["summary.json"])
    return CommandResult(status, outdir, summary)


def _graph_or(spec: ExperimentSpec, default):
    return build_graph_from_spec(spec.graph) if spec.graph is not None else default()


DEFAULT_GRAPH = {"generator": "triangle"}


def _run_suite(spec: ExperimentSpec, suite: str) -> checks.CheckReport:
    t = spec.trials
    if suite == "period":
        return checks.verify_period(t, spec.seed)
    if suite == "flips":
        graphs = [build_graph_from_spec(spec.graph)] if spec.graph is not None else [
            gr.path_graph(41), gr.torus_graph(12, 12), gr.tree_ball(3, 5)
        ]
        return checks.verify_flips(graphs, t, spec.seed)
    if suite == "bunker":
        return checks.verify_bunker(_graph_or(spec, lambda: gr.path_graph(41)), spec.vertex, t, spec.seed)
    if suite == "lyapunov":
        return checks.verify_lyapunov(t, max(1, t // 2), min(50, t), spec.seed)
    if suite == "monopoly":
        g = _graph_or(spec, lambda: gr.torus_graph(50, 50))
        if g.meta.get("kind") != "torus":
            raise ValidationError("graph: the monopoly suite needs a torus")
        return checks.verify_monopoly(g, t, spec.seed)
    if suite == "gadget":
        graphs = [build_graph_from_spec(spec.graph)] if spec.graph is not None else None
        if graphs and not graphs[0].meta.get("gadgets"):
            raise ValidationError("graph: the gadget suite needs a gadget graph")
        return checks.verify_gadget(graphs, t, spec.seed)
    raise ValidationError(f"suite: unknown suite {suite!r}")


def cmd_verify(spec: ExperimentSpec, suite: str | None = None) -> CommandResult:
    """Run one theorem-check suite; exit 3 on any failed check."""
    suite = suite or spec.suite
    if suite not in SUITES:
        raise ValidationError(f"suite: expected one of {', '.join(SUITES)}, got {suite!r}")
    spec = replace(spec, suite=suite)
    outdir = _prepare(spec, "verify")
    rep = _run_suite(spec, suite)
    _write(outdir, "report.json", rep.to_json() + "\n")
    _manifest(outdir, spec, "verify", ["report.json"])
    return CommandResult(EXIT_OK if rep.passed else EXIT_THEOREM, outdir, rep.to_dict())


def _estimate(spec: ExperimentSpec) -> EstimatorResult:
    g = build_graph_from_spec(spec.graph or DEFAULT_GRAPH)
    return monte_carlo_delta(g, spec.p, spec.estimator_obj(), spec.trials, spec.seed, spec.model)


def cmd_estimate(spec: ExperimentSpec) -> CommandResult:
    build_graph_from_spec(spec.graph or DEFAULT_GRAPH)  # validate before any output
    spec.estimator_obj()
    outdir = _prepare(spec, "estimate")
    res = _estimate(spec)
    _write(outdir, "result.json", res.to_json() + "\n")
    _write(outdir, "result.csv", res.to_csv())
    _manifest(outdir, spec, "estimate", ["result.json", "result.csv"])
    return CommandResult(EXIT_OK, outdir, res.to_dict())


def _cell(args):
    spec_dict, overrides = args
    try:
        spec = spec_from_dict(spec_dict, **overrides)
        res = _estimate(spec)
        return "ok", res.csv_row()
    except TheoremViolation as exc:
        return "theorem", [f"{type(exc).__name__}: {exc}"]
    except MajDynError as exc:
        return "error", [f"{type(exc).__name__}: {exc}"]


def _grid_cells(grid: dict) -> list[dict]:
    if not grid:
        return []
    keys = list(grid)
    return [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]


def cmd_sweep(spec: ExperimentSpec) -> CommandResult:
    """Cross product of ``grid`` values; one CSV row per cell in grid order."""
    grid = spec.grid or {}
    base = {k: v for k, v in asdict(spec).items() if v is not None and k not in ("grid",)}
    cells = _grid_cells(grid)
    for cell in cells:  # validate every cell before running any
        spec_from_dict(base, **cell)
    outdir = _prepare(spec, "sweep")
    jobs = [(base, cell) for cell in cells]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_cell, jobs))
    else:
        results = [_cell(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"cell_{k}" for k in grid] + ["status"] + list(EstimatorResult.CSV_HEADER))
    hard = False
    for cell, (status, row) in zip(cells, results):
        hard |= status == "theorem"
        vals = [json.dumps(cell[k]) if isinstance(cell[k], (dict, list)) else cell[k] for k in grid]
        w.writerow(vals + [status] + row)
    _write(outdir, "sweep.csv", buf.getvalue())
    _manifest(outdir, spec, "sweep", ["sweep.csv"], {"cells": len(cells)})
    return CommandResult(EXIT_THEOREM if hard else EXIT_OK, outdir, {"cells": len(cells)})


def cmd_gadget_demo(spec: ExperimentSpec) -> CommandResult:
    """Gadget graph (default: ``K_4`` with one edge replaced), synchronous runs
    from uniform configurations, per-copy stabilisation times."""
    g = build_graph_from_spec(spec.graph or {"generator": "gadget"})
    if not g.meta.get("gadgets"):
        raise ValidationError("graph: gadget-demo needs a gadget graph")
    outdir = _prepare(spec, "gadget-demo")
    rows, status = [], EXIT_OK
    for k in range(spec.trials):
        rng = np.random.default_rng(trial_seed(spec.seed, k))
        c = rng.choice(np.array([-1, 1], dtype=np.int8), size=g.n)
        tr = run_sync_until_cycle(g, c)
        times = checks.gadget_stabilization(g, tr)
        if any(t is None or t > 2 for t in times):
            status = EXIT_THEOREM
        rows.append({"trial": k, "t_cycle": tr.t_cycle, "period": tr.period, "stabilization": times})
    summary = {
        "graph": repr(g),
        "gadgets": [{"edge": list(gd["edge"]), "A": gd["A"], "B": gd["B"]} for gd in g.meta["gadgets"]],
        "runs": rows,
        "max_stabilization": max((max((t if t is not None else -1) for t in r["stabilization"]) for r in rows),
                                 default=None),
    }
    _write(outdir, "graph.txt", gr.write_graph(g))
    _write(outdir, "summary.json", json.dumps(summary, sort_keys=True, indent=2) + "\n")
    _manifest(outdir, spec, "gadget-demo", ["graph.txt", "summary.json"])
    return CommandResult(status, outdir, summary)


def backend() -> str:
    return kernels.BACKEND
