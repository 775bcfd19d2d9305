"""Command-line entry point: ``pfca generate|mine|cluster|verify|classify``.

Exit codes: 0 success, 1 a checked property failed, 2 usage, input or
configuration error. The thread count may be overridden with ``PFCA_THREADS``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from .config import ConfigError, RunConfig
from .context import ContextError, LiteralSet, build_context, object_intent
from .fixpoint import FixedPointConcept, FixpointError, classify, cluster
from .io import (
    FormatError,
    dump_concepts_json,
    dump_rules,
    load_concepts_json,
    load_rules,
    read_context,
    read_rows,
    read_schema,
    render_concepts_text,
    write_context,
    write_labels,
)
from .measure import Measure
from .miner import SearchError, mine_mscr
from .oracle import THEOREMS, BudgetError, OracleBudget, verify_random, verify_theorems
from .synthetic import SyntheticError, SyntheticSpec, generate_synthetic

log = logging.getLogger("pfca")

USAGE_ERRORS = (ConfigError, ContextError, FormatError, BudgetError, SearchError, SyntheticError)


class UsageError(Exception):
    pass


def _existing(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {p}")
    return p


def _load_context(args):
    csv_path = _existing(args.input, "context")
    schema_path = _existing(args.schema, "schema")
    ctx, weights = read_context(csv_path, schema_path, getattr(args, "weight_column", None))
    return ctx, weights


def _add_context_args(p, required=True):
    p.add_argument("--input", required=required, help="context CSV (first column = object name)")
    p.add_argument("--schema", required=required, help="schema sidecar file")


def _run_config(args) -> RunConfig:
    return RunConfig(
        alpha=args.alpha,
        epsilon=args.epsilon,
        max_premise_len=args.max_premise_len,
        mode=args.mode,
        mscr_strict=args.mscr_strict,
        beam_width=args.beam_width,
        seed=args.seed,
        threads=args.threads,
    )


# ---------------------------------------------------------------- commands


def cmd_generate(args) -> int:
    spec = SyntheticSpec(
        n_classes=args.n_classes,
        copies_per_class=args.copies_per_class,
        n_attributes=args.n_attributes,
        values_per_attribute=args.values_per_attribute,
        min_pairwise_hamming=args.min_pairwise_hamming,
        noise_rate=args.noise_rate,
    )
    ctx, labels, _ = generate_synthetic(spec, seed=args.seed)
    write_context(ctx, args.out, args.schema)
    if args.labels:
        write_labels(args.labels, ctx.object_names, labels)
    print(f"wrote {ctx.n_objects} objects x {len(ctx.schema)} attributes to {args.out} ({spec.n_flips} noisy cells)")
    return 0


def cmd_mine(args) -> int:
    config = _run_config(args)
    ctx, weights = _load_context(args)
    measure = Measure.from_weights(weights) if weights is not None else None
    t0 = time.perf_counter()
    rules = mine_mscr(ctx, measure, config)
    elapsed = time.perf_counter() - t0
    dump_rules(ctx, rules, args.out)
    echo = json.dumps(config.as_dict(), sort_keys=True)
    print(f"mined {len(rules)} rules in {elapsed:.2f}s -> {args.out}; config {echo}")
    return 0


def _concepts(args):
    ctx, _ = _load_context(args)
    rules = load_rules(ctx, _existing(args.rules, "rule"))
    concepts = cluster(ctx, rules, args.epsilon, operator=args.operator)
    return ctx, rules, concepts


def cmd_cluster(args) -> int:
    ctx, rules, concepts = _concepts(args)
    if args.format == "json":
        dump_concepts_json(ctx, concepts, args.out)
    else:
        Path(args.out).write_text(render_concepts_text(ctx, concepts, len(rules)), encoding="utf-8")
    if len(rules) == 0:
        print("note: empty rule set; every object intent is its own fixed point (degenerate clustering)")
    sizes = " ".join(str(len(c.seed_objects)) for c in concepts)
    print(f"{len(concepts)} fixed points from {ctx.n_objects} objects and {len(rules)} rules; seeds per concept: {sizes}")
    return 0


def cmd_verify(args) -> int:
    selected = args.properties.split(",") if args.properties else list(THEOREMS)
    unknown = [k for k in selected if k not in THEOREMS]
    if unknown:
        raise UsageError(f"unknown properties {unknown}; choose from {sorted(THEOREMS)}")
    budget = OracleBudget(args.budget_objects, args.budget_atoms, args.budget_premise)
    if args.input:
        ctx, _ = _load_context(args)
        report = verify_theorems(ctx, budget, trials=args.trials, seed=args.seed, epsilon=args.epsilon)
        source = args.input
    else:
        report = verify_random(args.contexts, budget, seed=args.seed, trials=args.trials)
        source = f"{args.contexts} random contexts"
    report.results = {k: report.results[k] for k in selected}
    print(f"theorem properties on {source}:")
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def cmd_classify(args) -> int:
    ctx, _ = _load_context(args)
    rules = load_rules(ctx, _existing(args.rules, "rule"))
    records = load_concepts_json(_existing(args.concepts, "concept"))
    index = {n: g for g, n in enumerate(ctx.object_names)}
    concepts = [
        FixedPointConcept(
            LiteralSet(ctx.parse_literal(x) for x in rec["intent"]),
            rec["int_value"],
            frozenset(index[n] for n in rec["extent"] if n in index),
            (),
            rec["consistent"],
        )
        for rec in records
    ]
    schema, boolean = read_schema(args.schema)
    rows, _ = read_rows(_existing(args.rows, "rows"))
    new = build_context(rows, schema, boolean=boolean)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["object", "concept"])
        for g, name in enumerate(new.object_names):
            k = classify(ctx, rules, concepts, object_intent(new, g), args.epsilon)
            w.writerow([name, "" if k is None else k + 1])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfca", description="Probabilistic formal concepts from categorical tables.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic prototype dataset")
    g.add_argument("--out", required=True, help="context CSV to write")
    g.add_argument("--schema", required=True, help="schema sidecar to write")
    g.add_argument("--labels", help="class labels CSV (never read by mine or cluster)")
    g.add_argument("--n-classes", type=int, default=12)
    g.add_argument("--copies-per-class", type=int, default=30)
    g.add_argument("--n-attributes", type=int, default=24)
    g.add_argument("--values-per-attribute", type=int, default=8)
    g.add_argument("--min-pairwise-hamming", type=int, default=None)
    g.add_argument("--noise-rate", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("mine", help="mine strongest causal rules")
    _add_context_args(m)
    m.add_argument("--weight-column", help="CSV column holding per-object weights (exact mode only)")
    m.add_argument("--out", required=True, help="rule dump (JSON lines)")
    m.add_argument("--alpha", type=float, default=0.01)
    m.add_argument("--epsilon", type=float, default=1e-4)
    m.add_argument("--max-premise-len", type=int, default=None, help="default 4 in exact mode, 5 in fisher mode")
    m.add_argument("--mode", choices=("exact", "fisher"), default="fisher")
    m.add_argument("--mscr-strict", action="store_true", help="exact mode: keep only the top-eta terminals")
    m.add_argument("--beam-width", type=int, default=None)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--threads", type=int, default=1)
    m.set_defaults(func=cmd_mine)

    c = sub.add_parser("cluster", help="run every object intent to its fixed point")
    _add_context_args(c)
    c.add_argument("--rules", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.add_argument("--operator", choices=("upsilon", "closure"), default="upsilon")
    c.add_argument("--epsilon", type=float, default=1e-4)
    c.set_defaults(func=cmd_cluster)

    v = sub.add_parser("verify", help="check the theorem properties against brute force")
    _add_context_args(v, required=False)
    v.add_argument("--contexts", type=int, default=50, help="random contexts when --input is absent")
    v.add_argument("--budget-objects", type=int, default=8)
    v.add_argument("--budget-atoms", type=int, default=5)
    v.add_argument("--budget-premise", type=int, default=3)
    v.add_argument("--trials", type=int, default=20, help="random seeds per context besides object intents")
    v.add_argument("--properties", help=f"comma-separated subset of {','.join(THEOREMS)}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--epsilon", type=float, default=1e-4)
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("classify", help="assign new rows to fixed points")
    _add_context_args(k)
    k.add_argument("--rules", required=True)
    k.add_argument("--concepts", required=True, help="JSON concept dump from 'cluster --format json'")
    k.add_argument("--rows", required=True, help="CSV of rows to classify (same schema)")
    k.add_argument("--out", help="assignments CSV (default stdout)")
    k.add_argument("--epsilon", type=float, default=1e-4)
    k.set_defaults(func=cmd_classify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if getattr(args, "input", None) and not getattr(args, "schema", None):
        parser.error("--input needs --schema")
    if getattr(args, "epsilon", None) is not None and not 0 < args.epsilon < 1:
        print(f"pfca: error: epsilon must lie in (0, 1), got {args.epsilon}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, OSError, *USAGE_ERRORS) as exc:
        print(f"pfca: error: {exc}", file=sys.stderr)
        return 2
    except FixpointError as exc:
        print(f"pfca: property violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
