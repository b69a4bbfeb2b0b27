"""Command-line front end.

Subcommands: run (config-driven experiment), attack-ams, flipnum,
calibrate-ams, bench.  Exit code 0 iff all trials complete without
protocol violations.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict

import numpy as np

from .core import StreamUpdate
from .flipnum import flip_number
from .harness import STATUS_VIOLATION, run_ams_attack, run_trials
from .sketches import AMS, CountSketch, EntropySample, F0Fast, KMV, PStable


def _cmd_run(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.out is not None:
        config["out_dir"] = args.out
    summary = run_trials(config)
    print(json.dumps(summary.to_dict(), indent=2))
    return 1 if any(s == STATUS_VIOLATION for s in summary.statuses) else 0


def _cmd_attack_ams(args) -> int:
    n = args.n if args.n is not None else max(100 * args.rows, 10**5)
    budget = args.budget if args.budget is not None else 50 * args.rows
    result = run_ams_attack(
        args.rows, n, args.trials, budget, args.c, args.seed or 0
    )
    print(json.dumps(result, indent=2))
    return 0


def _read_sequence(path: str):
    vals = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line or line.startswith("@"):
                continue
            vals.append(float(line))
    return vals


def _cmd_flipnum(args) -> int:
    seq = _read_sequence(args.input)
    report = flip_number(seq, args.eps)
    out = asdict(report)
    out["witness"] = list(out["witness"])
    print(json.dumps(out, indent=2))
    return 0


def _cmd_calibrate_ams(args) -> int:
    cs = [float(x) for x in args.sweep_c.split(",")]
    rows = []
    for C in cs:
        n = max(100 * args.rows, 10**5)
        budget = args.budget if args.budget is not None else 50 * args.rows
        r = run_ams_attack(args.rows, n, args.trials, budget, C, args.seed or 0)
        rows.append({"c": C, "success_rate": r["success_rate"]})
    print(json.dumps({"rows": args.rows, "trials": args.trials, "sweep": rows}, indent=2))
    return 0


_BENCH_BUILDERS = {
    "f0fast": lambda n, seed: F0Fast(n, 0.1, 0.05, seed),
    "kmv": lambda n, seed: KMV(0.1, 0.05, seed),
    "ams": lambda n, seed: AMS(256, seed),
    "pstable": lambda n, seed: PStable(1.0, 0.1, 0.05, seed),
    "countsketch": lambda n, seed: CountSketch(n, 0.1, 0.05, seed),
    "entropy": lambda n, seed: EntropySample(10**5, 0.2, 0.05, seed),
}


def _cmd_bench(args) -> int:
    if args.sketch not in _BENCH_BUILDERS:
        print(f"unknown sketch: {args.sketch}", file=sys.stderr)
        return 2
    n, m = args.n, args.m
    sk = _BENCH_BUILDERS[args.sketch](n, args.seed or 0)
    rng = np.random.default_rng(args.seed or 0)
    ids = rng.integers(1, n + 1, size=m)
    start = time.perf_counter()
    for a in ids:
        sk.update(StreamUpdate(int(a), 1))
    update_s = time.perf_counter() - start
    start = time.perf_counter()
    est = sk.query()
    query_s = time.perf_counter() - start
    print(json.dumps({
        "sketch": args.sketch, "n": n, "updates": m,
        "updates_per_sec": m / update_s if update_s > 0 else float("inf"),
        "query_sec": query_s, "estimate": est,
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robuststream")
    p.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    sub = p.add_subparsers(dest="cmd", required=True)

    q = sub.add_parser("run", help="run a config-driven experiment")
    q.add_argument("--config", required=True)
    q.add_argument("--out", default=None, help="output directory for traces/summary")
    q.set_defaults(fn=_cmd_run)

    q = sub.add_parser("attack-ams", help="adaptive attack on the AMS sketch")
    q.add_argument("--rows", type=int, required=True, help="sketch rows t")
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--budget", type=int, default=None, help="update budget (default 50t)")
    q.add_argument("--c", type=float, default=8.0, help="heavy-insert scale C")
    q.add_argument("--n", type=int, default=None)
    q.set_defaults(fn=_cmd_attack_ams)

    q = sub.add_parser("flipnum", help="flip number of a value sequence")
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--input", required=True, help="one value per line; # comments")
    q.set_defaults(fn=_cmd_flipnum)

    q = sub.add_parser("calibrate-ams", help="attack success rate across C values")
    q.add_argument("--sweep-c", default="1,2,4,8,16", help="comma-separated C values")
    q.add_argument("--rows", type=int, default=64)
    q.add_argument("--trials", type=int, default=20)
    q.add_argument("--budget", type=int, default=None)
    q.set_defaults(fn=_cmd_calibrate_ams)

    q = sub.add_parser("bench", help="update/query throughput of one sketch")
    q.add_argument("--sketch", required=True, choices=sorted(_BENCH_BUILDERS))
    q.add_argument("--n", type=int, default=10**5)
    q.add_argument("--m", type=int, default=10**5)
    q.set_defaults(fn=_cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
