"""Operator entry point: generate, run, verify, benchmark.

All randomness flows from --seed; subordinate seeds derive via
rng.child_seed.  Exit codes: 0 checker pass, 1 checker fail, 2 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import coloring, divide, graphs, rng, sim, splitting, verify

BENCH_COLUMNS = [
    "algo", "n", "degree", "k", "q", "eps", "mode", "seeds", "pass_rate",
    "max_discrepancy", "frozen_fraction", "max_bad_component", "rounds", "bits_total",
    "violations",
]


def _mode(name: str) -> sim.SimMode:
    return sim.SimMode("CONGEST" if name == "congest" else "LOCAL")


def _load_graph(args, seed):
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
        if text.lstrip().startswith("bipartite"):
            return graphs.load_bipartite(text)
        if text.lstrip().startswith("lists"):
            return coloring.ListInstance.from_text(text)
        return graphs.load_edge_list(text)
    spec = graphs.GraphGenSpec(args.gen, n=args.n, degree=args.degree,
                               seed=rng.child_seed(seed, 0, rng.TAG_GRAPH_GEN))
    return graphs.generate(spec)


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_gen(args) -> int:
    if args.model == "lists":
        inst = coloring.make_list_instance(args.n, args.L, args.T, args.seed,
                                           model=args.list_model)
        _write(args.out, inst.to_text())
        return 0
    model = {"dregular": "d-regular", "gnp": "gnp-capped"}[args.model]
    g = graphs.generate(graphs.GraphGenSpec(model, n=args.n, degree=args.degree,
                                            seed=args.seed))
    _write(args.out, graphs.dump_edge_list(g))
    return 0


def _artifact(algo, config, body, check: verify.CheckReport):
    doc = {"algo": algo, "config": config, "check": json.loads(check.to_json())}
    doc.update(body)
    return json.dumps(doc, sort_keys=True)


def cmd_run(args) -> int:
    mode = _mode(args.mode)
    g = _load_graph(args, args.seed)
    config = {"algo": args.algo, "k": args.k, "q": args.q, "eps": args.eps,
              "delta": args.delta, "mode": args.mode, "seed": args.seed,
              "strict": args.strict, "c_const": args.c_const, "ell": args.ell,
              "Q": args.Q, "threshold_mode": args.threshold_mode}
    report = sim.RunReport(seed=args.seed)
    if args.algo == "qdivide":
        params = divide.DivideParams(q=args.q, threshold_mode=args.threshold_mode,
                                     strictness="strict" if args.strict else "permissive",
                                     ell=args.ell)
        schedule, report = divide.q_divide(g, params, mode, args.seed)
        check = verify.check_divide(g, schedule)
        artifact = _artifact("qdivide", config, {"schedule": json.loads(schedule.to_json())}, check)
    elif args.algo in ("split", "bipartite-split"):
        params = splitting.SplitParams(k=args.k, eps=args.eps, mode=mode,
                                       strict=args.strict, ell=args.ell, q_colors=args.Q,
                                       c_pre=args.c_const)
        assignment, report = splitting.k_split(g, params, seed=args.seed)
        check = verify.check_split(g, assignment.parts, args.k, args.eps)
        artifact = _artifact(args.algo, config,
                             {"assignment": json.loads(assignment.to_json())}, check)
    elif args.algo == "defective":
        colors, report = coloring.defective_color(g, args.k, args.eps, seed=args.seed,
                                                  mode=mode, c_pre=args.c_const,
                                                  ell=args.ell, q_colors=args.Q)
        check = verify.check_defective(g, colors, args.k, args.eps)
        artifact = _artifact("defective", config, {"colors": colors.tolist()}, check)
    elif args.algo == "edge-color":
        ec, report = coloring.edge_color(g, args.eps, mode, args.seed)
        budget = (1.0 + args.eps) * g.max_degree
        check = verify.check_edge_coloring(g, ec, budget)
        artifact = _artifact("edge-color", config,
                             {"coloring": json.loads(ec.to_json()), "stages": _jsonable(ec.stages)},
                             check)
    elif args.algo == "list-color":
        colors = coloring.list_color(g, args.delta, mode, args.seed)
        check = verify.check_list_coloring(g, colors)
        artifact = _artifact("list-color", config, {"colors": colors.tolist()}, check)
    else:
        raise ValueError(f"unknown algorithm {args.algo!r}")
    if args.out:
        _write(args.out + ".artifact.json", artifact)
        _write(args.out + ".report.json", report.to_json())
    else:
        sys.stdout.write(artifact + "\n")
    return 0 if check.passed else 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _ints(text):
    return [int(x) for x in text.split(",") if x != ""]


def _floats(text):
    return [float(x) for x in text.split(",") if x != ""]


def cmd_bench(args) -> int:
    rows = []
    for n in _ints(args.ns):
        for d in _ints(args.ds):
            for k in _ints(args.ks):
                for q in _ints(args.qs):
                    for eps in _floats(args.epss):
                        rows.append(_bench_point(args, n, d, k, q, eps))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    return 0


def _bench_point(args, n, d, k, q, eps):
    mode = _mode(args.mode)
    seeds = _ints(args.seeds)
    passes = 0
    max_disc = 0.0
    frozen_fraction = 0.0
    max_bad = 0
    rounds = 0
    bits = 0
    violations = 0
    for s in seeds:
        g = graphs.generate(graphs.GraphGenSpec(
            "d-regular", n=n, degree=d, seed=rng.child_seed(s, 0, rng.TAG_BENCH)))
        try:
            if args.algo == "qdivide":
                schedule, report = divide.q_divide(g, divide.DivideParams(q=q), mode, s)
                check = verify.check_divide(g, schedule)
            else:
                params = splitting.SplitParams(k=k, eps=eps, mode=mode)
                assignment, report = splitting.k_split(g, params, seed=s)
                check = verify.check_split(g, assignment.parts, k, eps)
            passes += int(check.passed)
            max_disc = max(max_disc, check.max_value)
            frozen_fraction += report.payload.get("frozen_total", 0) / max(n, 1)
            max_bad = max(max_bad, max(report.payload.get("bad_sizes", [0]) or [0]))
            rounds = max(rounds, report.rounds)
            bits = max(bits, report.bits_total)
            violations = max(violations, report.violations)
        except (splitting.SplitError, divide.DivideError):
            pass
    return {
        "algo": args.algo, "n": n, "degree": d, "k": k, "q": q, "eps": eps,
        "mode": args.mode, "seeds": len(seeds), "pass_rate": passes / max(len(seeds), 1),
        "max_discrepancy": max_disc, "frozen_fraction": frozen_fraction / max(len(seeds), 1),
        "max_bad_component": max_bad, "rounds": rounds, "bits_total": bits,
        "violations": violations,
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="splitsim")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a graph or list-instance file")
    gen.add_argument("--model", choices=["dregular", "gnp", "lists"], required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--degree", type=int, default=0)
    gen.add_argument("--L", type=int, default=0)
    gen.add_argument("--T", type=int, default=0)
    gen.add_argument("--list-model", choices=["shared", "random"], default="shared")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)

    run = sub.add_parser("run", help="run an algorithm, check it, write artifacts")
    run.add_argument("--algo", required=True,
                     choices=["qdivide", "split", "bipartite-split", "edge-color",
                              "list-color", "defective"])
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--gen", choices=["d-regular", "gnp-capped"])
    run.add_argument("--n", type=int, default=0)
    run.add_argument("--degree", type=int, default=0)
    run.add_argument("--k", type=int, default=2)
    run.add_argument("--q", type=int, default=2)
    run.add_argument("--eps", type=float, default=0.5)
    run.add_argument("--delta", type=float, default=1.0)
    run.add_argument("--mode", choices=["local", "congest"], default="local")
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--out", default=None)
    run.add_argument("--strict", action="store_true")
    run.add_argument("--permissive", dest="strict", action="store_false")
    run.add_argument("--c-const", dest="c_const", type=float, default=1.0)
    run.add_argument("--ell", type=int, default=None)
    run.add_argument("--Q", type=int, default=None)
    run.add_argument("--threshold-mode", choices=["uniform", "local"], default="uniform")

    bench = sub.add_parser("bench", help="sweep a parameter grid, write CSV")
    bench.add_argument("--algo", choices=["split", "qdivide"], required=True)
    bench.add_argument("--ns", required=True)
    bench.add_argument("--ds", required=True)
    bench.add_argument("--ks", default="2")
    bench.add_argument("--qs", default="2")
    bench.add_argument("--epss", default="0.5")
    bench.add_argument("--seeds", required=True)
    bench.add_argument("--mode", choices=["local", "congest"], default="local")
    bench.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "bench":
            return cmd_bench(args)
    except (graphs.GraphError, divide.DivideError, splitting.SplitError,
            coloring.ColoringError, verify.CheckError, sim.SimError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
