"""Command-line front end: ``kmodal gen|learn|test-monotone|sweep``.

Exit codes: 0 success, 2 learner error, 3 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io as kio
from .errors import KModalError
from .harness import ALGOS, FAMILIES, GeneratorSpec, gen, learner_for, sweep_rows, rows_to_csv
from .learners import LearnerConfig
from .sampling import SampleOracle
from .tester import test_nondecreasing, test_nonincreasing

EXIT_OK, EXIT_LEARNER, EXIT_INPUT = 0, 2, 3


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _floats(s: str):
    return [float(v) for v in s.split(",") if v]


def _ints(s: str):
    return [int(v) for v in s.split(",") if v]


def cmd_gen(a) -> int:
    spec = GeneratorSpec(a.family, a.n, a.k, a.seed, a.noise)
    _emit(kio.dumps(gen(spec)), a.out)
    return EXIT_OK


def cmd_learn(a) -> int:
    p = kio.load_pmf(a.dist)
    cfg = LearnerConfig(eps=a.eps, k=a.k, delta=a.delta, seed=a.seed)
    oracle = SampleOracle(p, a.seed)
    h = learner_for(a.algo)(oracle, p.n, cfg)
    text = kio.dumps(h)
    if a.out:
        _emit(text, a.out)
        if a.meter:
            sys.stdout.write(kio.dumps({"samples": oracle.samples_drawn}))
    elif a.meter:
        sys.stdout.write(kio.dumps({"hypothesis": kio.hypothesis_to_dict(h), "samples": oracle.samples_drawn}))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_test(a) -> int:
    p = kio.load_pmf(a.dist)
    oracle = SampleOracle(p, a.seed)
    run = test_nondecreasing if a.direction == "up" else test_nonincreasing
    v = run(oracle, p.n, a.k, a.tau, a.delta)
    _emit(kio.dumps(v.to_dict()), a.out)
    return EXIT_OK


def cmd_sweep(a) -> int:
    grid = {"n": _ints(a.n), "k": _ints(a.k), "eps": _floats(a.eps), "budget": _floats(a.budget), "algo": a.algo.split(",")}
    for algo in grid["algo"]:
        if algo not in ALGOS:
            raise ValueError(f"unknown algorithm {algo!r}")
    rows = sweep_rows(grid, a.trials, a.seed, family=a.family, noise=a.noise, delta=a.delta, timing=a.timing)
    if a.format == "json":
        text = kio.dumps(rows)
    else:
        text = rows_to_csv(rows)
    _emit(text, a.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kmodal", description="Learn and test k-modal distributions.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a synthetic target pmf as JSON")
    g.add_argument("--family", choices=FAMILIES, default="random-kmodal")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    l = sub.add_parser("learn", help="learn a hypothesis from samples of a pmf file")
    l.add_argument("--dist", required=True)
    l.add_argument("--k", type=int, required=True)
    l.add_argument("--eps", type=float, required=True)
    l.add_argument("--delta", type=float, default=0.1)
    l.add_argument("--algo", choices=ALGOS, default="main")
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--out")
    l.add_argument("--meter", action="store_true", help="also report the number of samples drawn")
    l.set_defaults(func=cmd_learn)

    t = sub.add_parser("test-monotone", help="run the amplified monotonicity tester")
    t.add_argument("--dist", required=True)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--tau", type=float, required=True)
    t.add_argument("--delta", type=float, default=0.1)
    t.add_argument("--direction", choices=("up", "down"), default="up")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("sweep", help="run a grid of trials and emit CSV rows plus per-cell aggregates")
    s.add_argument("--family", choices=FAMILIES, default="random-kmodal")
    s.add_argument("--n", default="1000")
    s.add_argument("--k", default="1")
    s.add_argument("--eps", default="0.2")
    s.add_argument("--budget", default="1", help="comma-separated budget multipliers")
    s.add_argument("--algo", default="main")
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical reruns)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return a.func(a)
    except KModalError as exc:
        sys.stderr.write(f"learner error: {exc}\n")
        return EXIT_LEARNER
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
