#!/usr/bin/env python3
"""Compiled vs pure-Python SAT core on random 3-SAT and MaxSAT workloads.

    python benchmarks/bench_sat.py [--vars 150] [--instances 8] [--repeat 3]

Both cores run the same search, so models and conflict counts must match;
the script checks that before reporting times.
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
import time

from varconf.backend import available_backends
from varconf.formula import And, Not, Or, VarTable
from varconf.solver import SoftConstraint, max_sat


def random_3sat(rng, n, ratio):
    return [[rng.choice((-1, 1)) * v for v in rng.sample(range(1, n + 1), 3)]
            for _ in range(int(n * ratio))]


def run_cnf(core_class, n, clauses):
    core = core_class(n)
    for c in clauses:
        core.add_clause(c)
    ok = core.solve()
    return ok, (core.model() if ok else None), core.conflicts


def random_soft(rng, vars, k):
    def f(depth):
        if depth == 0 or rng.random() < 0.3:
            v = rng.choice(vars)
            return Not(v) if rng.random() < 0.5 else v
        kids = tuple(f(depth - 1) for _ in range(2))
        return And(kids) if rng.random() < 0.5 else Or(kids)
    return [SoftConstraint(f(3), rng.randint(1, 5)) for _ in range(k)]


def timed(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vars", type=int, default=150)
    ap.add_argument("--ratio", type=float, default=4.26)
    ap.add_argument("--instances", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    cores = available_backends()
    if "compiled" not in cores:
        print("compiled core not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
    rng = random.Random(args.seed)
    cnfs = [random_3sat(rng, args.vars, args.ratio) for _ in range(args.instances)]
    vt = VarTable([f"x{i}" for i in range(30)])
    softs = [random_soft(rng, list(vt), 40) for _ in range(args.instances)]

    workloads = {
        f"3-SAT n={args.vars} m/n={args.ratio}":
            lambda cls: [run_cnf(cls, args.vars, c) for c in cnfs],
        "MaxSAT 30 vars, 40 soft":
            lambda cls: [max_sat([], s, 30, core_class=cls).total_weight for s in softs],
    }
    print(f"{'workload':<32}" + "".join(f"{name:>12}" for name in sorted(cores)) + "   speedup")
    for label, work in workloads.items():
        results, times = {}, {}
        for name, cls in sorted(cores.items()):
            times[name], results[name] = timed(lambda: work(cls), args.repeat)
        if len({repr(r) for r in results.values()}) != 1:
            print(f"{label}: backends disagree", file=sys.stderr)
            return 1
        speed = (f"{times['python'] / times['compiled']:8.1f}x"
                 if "compiled" in times else "       -")
        print(f"{label:<32}" + "".join(f"{times[n]:>11.3f}s" for n in sorted(cores))
              + f"  {speed}")
        if label.startswith("3-SAT"):
            conflicts = [r[2] for r in results["python"]]
    print(f"median conflicts per 3-SAT instance: {statistics.median(conflicts):.0f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
