"""Command-line entry point: ``hvlgp run | experiment | oracle | tree``.

Exit codes: 0 success, 1 a failed oracle check, 2 invalid input or config.
"""
from __future__ import annotations

import argparse
import random
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import harness, oracles
from .engine import ConfigError, RunConfig, run
from .problems import majority_fitness, order_fitness
from .tree import hvl_prime_step, parse_tree, term_str

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags given explicitly override it")
    p.add_argument("--problem", choices=["order", "majority"])
    p.add_argument("--n", type=int)
    p.add_argument("--acceptance", choices=["nonstrict", "strict"])
    p.add_argument("--ops", choices=["single", "multi"])
    p.add_argument("--init", help="unity | adversarial-neg1 | t-lopt | text:<tree>")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, help="max evaluations, 0 = unlimited")
    p.add_argument("--no-stuck-detection", action="store_true")
    p.add_argument("--trace-level", type=int, choices=[0, 1, 2])
    p.add_argument("--reference", action="store_true", help="force the copy-mutate-evaluate path")
    p.add_argument("--show-tree", action="store_true", help="print the final tree")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hvlgp", description="GP hill climbers on ORDER and MAJORITY")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one seeded run; prints the result as key = value lines")
    _add_run_flags(p)

    p = sub.add_parser("experiment", help="seeded batch of runs from a preset or config file")
    p.add_argument("source", help=f"preset ({', '.join(harness.PRESETS)}) or path to a config file")
    p.add_argument("--master-seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--trials", type=int, help="override trials per n")
    p.add_argument("--n-values", help="override n values, e.g. 8,16,32")
    p.add_argument("--output", help=f"output directory (default ${harness.OUTPUT_ENV} or ./results)")

    p = sub.add_parser("oracle", help="exact checks; one tab-separated line per instance")
    p.add_argument("check", choices=sorted(oracles.CHECKS) + ["all"])
    p.add_argument("instance", nargs="?", help="serialized tree; omit for the built-in sweep")
    p.add_argument("--n", type=int)
    p.add_argument("--problem", default="order", help="operator check only")
    p.add_argument("--draws", type=int, default=100_000, help="operator check only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true", help="print failures and the tally only")

    p = sub.add_parser("tree", help="parse, mutate or evaluate a serialized tree")
    tsub = p.add_subparsers(dest="action", required=True)
    t = tsub.add_parser("parse")
    t.add_argument("text")
    t.add_argument("--n", type=int)
    t = tsub.add_parser("mutate")
    t.add_argument("text")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--steps", type=int, default=1)
    t = tsub.add_parser("eval")
    t.add_argument("text")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--problem", choices=["order", "majority", "both"], default="both")
    return ap


def _run_config(args) -> RunConfig:
    kv = harness.parse_kv(Path(args.config).read_text()) if args.config else {}
    for key in ("problem", "n", "acceptance", "ops", "init", "seed", "budget", "trace_level"):
        val = getattr(args, key)
        if val is not None:
            kv[key] = str(val)
    if args.no_stuck_detection:
        kv["stuck_detection"] = "false"
    cfg = harness.run_config_from_kv(kv)
    if args.reference:
        cfg = replace(cfg, reference=True)
    return cfg


def cmd_run(args, out) -> int:
    cfg = _run_config(args)
    res = run(cfg)
    for line in res.summary_lines():
        print(line, file=out)
    if args.show_tree:
        print(f"final_tree = {res.final_tree}", file=out)
    for line in res.trace:
        print(line, file=out)
    return EXIT_OK


def cmd_experiment(args, out) -> int:
    if args.source in harness.PRESETS:
        cfg = harness.preset(args.source)
    else:
        path = Path(args.source)
        if not path.is_file():
            raise ConfigError(f"{args.source!r} is neither a preset nor a readable file")
        cfg = harness.experiment_from_kv(harness.parse_kv(path.read_text()))
    changes = {}
    if args.master_seed is not None:
        changes["master_seed"] = args.master_seed
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.trials is not None:
        changes["trials_per_n"] = args.trials
    if args.n_values:
        changes["n_values"] = tuple(int(x) for x in args.n_values.replace(",", " ").split())
    changes["output"] = args.output or cfg.output or harness.default_output_dir()
    cfg = replace(cfg, **changes)

    rows, summary = harness.run_experiment(cfg)
    print(f"# {cfg.name}: {len(rows)} trials written to {cfg.output}", file=out)
    print("n\ttrials\toptimal\tmean_evals\tstd_evals\tstuck\tbudget\tmean_t_max", file=out)
    for s in summary:
        print(f"{s.n}\t{s.trials}\t{s.optimal}\t{s.mean_evaluations:.1f}\t{s.std_evaluations:.1f}\t"
              f"{s.stuck_fraction:.3f}\t{s.budget_fraction:.3f}\t{s.mean_t_max:.1f}", file=out)
    try:
        fit = harness.fit_scaling_exponent(summary)
        print(f"# exponent = {fit.exponent:.4f} intercept = {fit.intercept:.4f} "
              f"residual = {fit.residual_norm:.4g} over n = {list(fit.n_values)}", file=out)
    except ValueError as exc:
        print(f"# no scaling fit: {exc}", file=out)
    return EXIT_OK


def _oracle_lines(args):
    names = sorted(oracles.CHECKS) if args.check == "all" else [args.check]
    for name in names:
        fn = oracles.CHECKS[name]
        if name == "operator":
            kw = dict(draws=args.draws, seed=args.seed, problem=args.problem)
            if args.instance:
                kw.update(text=args.instance, n=args.n or 1)
            yield from fn(**kw)
        elif args.instance:
            if args.n is None:
                raise ConfigError("--n is required with an explicit instance")
            yield from fn(args.instance, args.n)
        elif name == "insert-bound":
            yield from fn(seed=args.seed)
        else:
            yield from fn()


def cmd_oracle(args, out) -> int:
    total = failed = 0
    for check, inst, passed, details in _oracle_lines(args):
        total += 1
        failed += not passed
        if not passed or not args.quiet:
            print(oracles.report_line(check, inst, passed, details), file=out)
    print(f"# {total - failed}/{total} passed", file=out)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_tree(args, out) -> int:
    tree = parse_tree(args.text, args.n)
    if args.action == "parse":
        leaves = " ".join(term_str(c) for c in tree.sequence)
        print(f"tree = {tree}", file=out)
        print(f"leaves = {leaves}", file=out)
        print(f"leaf_count = {tree.leaf_count}", file=out)
        print(f"node_count = {tree.node_count}", file=out)
        print(f"depth = {tree.depth()}", file=out)
    elif args.action == "mutate":
        rng = random.Random(args.seed)
        for step in range(args.steps):
            rec = hvl_prime_step(tree, rng, args.n)
            print(f"{step + 1}\t{rec.describe()}\t{tree}", file=out)
    else:
        if args.problem in ("order", "both"):
            f, path = order_fitness(tree.sequence, args.n)
            print(f"order = {f}\tpath = {' '.join(map(str, path))}", file=out)
        if args.problem in ("majority", "both"):
            f, prof = majority_fitness(tree.sequence, args.n)
            print(f"majority = {f}\texpressed = {' '.join(map(str, prof.expressed_set()))}"
                  f"\tdeficits = {' '.join(map(str, prof.deficits()))}", file=out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "experiment": cmd_experiment, "oracle": cmd_oracle, "tree": cmd_tree}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (ValueError, KeyError, OSError) as exc:  # ConfigError and TreeParseError are ValueErrors
        print(f"hvlgp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
