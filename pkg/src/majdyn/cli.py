"""Command-line entry point.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 a theorem
check failed.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .errors import TheoremViolation, ValidationError
from .kernels import BACKEND


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or TOML experiment file (a manifest also works)")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--trials", type=int)
    common.add_argument("--out", help="root directory for outputs")
    common.add_argument("--mode", choices=("float", "rational"))
    common.add_argument("--model", choices=("sync", "async"))
    common.add_argument("--p", type=float, help="probability an initial opinion matches S")
    common.add_argument("--workers", type=int, help="processes for sweep cells")

    ap = argparse.ArgumentParser(prog="majdyn", description="Majority dynamics on odd-degree graphs.")
    ap.add_argument("--version", action="version", version=f"majdyn 0.1.0 ({BACKEND} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run trajectories and write them out")
    v = sub.add_parser("verify", parents=[common], help="run a theorem-check suite")
    v.add_argument("suite", nargs="?", choices=harness.SUITES)
    sub.add_parser("estimate", parents=[common], help="Monte Carlo reconstruction error")
    sub.add_parser("sweep", parents=[common], help="estimate over a parameter grid")
    sub.add_parser("gadget-demo", parents=[common], help="gadget graph stabilisation demo")
    return ap


_COMMANDS = {
    "simulate": harness.cmd_simulate,
    "estimate": harness.cmd_estimate,
    "sweep": harness.cmd_sweep,
    "gadget-demo": harness.cmd_gadget_demo,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        data = harness.load_config(args.config) if args.config else {}
        spec = harness.spec_from_dict(
            data, seed=args.seed, trials=args.trials, out=args.out, mode=args.mode,
            model=args.model, p=args.p, workers=args.workers,
        )
        if args.command == "verify":
            res = harness.cmd_verify(spec, args.suite)
        else:
            res = _COMMANDS[args.command](spec)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_VALIDATION
    except TheoremViolation as exc:
        print(f"theorem check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return harness.EXIT_THEOREM
    status = "ok" if res.exit_code == 0 else "FAILED"
    print(json.dumps({"status": status, "outdir": str(res.outdir)}))
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
