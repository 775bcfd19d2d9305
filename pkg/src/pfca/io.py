"""Plain-text file formats: context CSV + schema sidecar, rule and concept dumps.

Schema sidecar::

    # comment
    @boolean = yes
    color = red | green | blue
    flag = 0 | 1

Rule dump (JSON lines): a header record ``{"format": "pfca-rules/1", ...}``
followed by one rule per line with fields, in this order, ``premise``,
``conclusion``, ``n_premise``, ``n_both``, ``eta``, ``p_value``,
``chain_len``. Floats are written with 17 significant digits.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .context import Context, ContextError, LiteralSet, atom_of, build_context, is_positive
from .fixpoint import FixedPointConcept
from .rules import CausalRule, RuleSet

RULES_FORMAT = "pfca-rules/1"
CONCEPTS_FORMAT = "pfca-concepts/1"


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------- schema


def write_schema(path, schema: dict, boolean: bool = True) -> None:
    lines = ["# pfca schema: attribute = value | value | ...", f"@boolean = {'yes' if boolean else 'no'}"]
    for attr, values in schema.items():
        for v in values:
            if "|" in v or "\n" in v:
                raise FormatError(f"value {v!r} of {attr!r} cannot be written to a schema file")
        if "=" in attr:
            raise FormatError(f"attribute name {attr!r} contains '='")
        lines.append(f"{attr} = {' | '.join(values)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_schema(path) -> tuple[dict[str, tuple[str, ...]], bool]:
    schema: dict[str, tuple[str, ...]] = {}
    boolean = True
    text = Path(path).read_text(encoding="utf-8")
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{n}: expected 'attribute = values'")
        key, _, rest = line.partition("=")
        key = key.strip()
        if key.startswith("@"):
            if key == "@boolean":
                boolean = rest.strip().lower() in ("yes", "true", "1")
                continue
            raise FormatError(f"{path}:{n}: unknown directive {key!r}")
        if key in schema:
            raise FormatError(f"{path}:{n}: attribute {key!r} declared twice")
        values = tuple(v.strip() for v in rest.split("|"))
        if not rest.strip() or any(v == "" for v in values):
            raise FormatError(f"{path}:{n}: empty value in domain of {key!r}")
        schema[key] = values
    return schema, boolean


def infer_schema(rows: Sequence[tuple[str, dict]]) -> dict[str, tuple[str, ...]]:
    """Value domains in order of first appearance."""
    schema: dict[str, list[str]] = {}
    for _, record in rows:
        for attr, value in record.items():
            vals = schema.setdefault(attr, [])
            if value not in ("", None) and value not in vals:
                vals.append(value)
    return {k: tuple(v) for k, v in schema.items()}


# ---------------------------------------------------------------- context CSV


def read_rows(path, weight_column: str | None = None):
    """Rows ``(name, {attribute: value})`` and optional per-row weights."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if len(header) < 1:
            raise FormatError(f"{path}: header row is empty")
        attrs = header[1:]
        weights = [] if weight_column else None
        if weight_column and weight_column not in attrs:
            raise FormatError(f"{path}: weight column {weight_column!r} not in header")
        rows = []
        for n, rec in enumerate(reader, 2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise FormatError(f"{path}:{n}: expected {len(header)} fields, got {len(rec)}")
            record = dict(zip(attrs, rec[1:]))
            if weight_column:
                try:
                    weights.append(float(record.pop(weight_column)))
                except ValueError:
                    raise FormatError(f"{path}:{n}: weight is not a number") from None
            rows.append((rec[0], record))
    return rows, weights


def read_context(csv_path, schema_path, weight_column: str | None = None):
    """Context plus the per-object weights (None unless ``weight_column``)."""
    schema, boolean = read_schema(schema_path)
    rows, weights = read_rows(csv_path, weight_column)
    try:
        ctx = build_context(rows, schema, boolean=boolean)
    except ContextError as exc:
        raise FormatError(f"{csv_path}: {exc}") from None
    return ctx, weights


def write_context(ctx: Context, csv_path, schema_path) -> None:
    write_schema(schema_path, ctx.schema, boolean=ctx.boolean_encoding)
    attrs = list(ctx.schema)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["object", *attrs])
        for g, name in enumerate(ctx.object_names):
            row = [name]
            for attr in attrs:
                value = ctx.value_of(g, attr)
                if value is not None and attr in ctx.boolean_attributes:
                    values = ctx.schema[attr]
                    truthy = [v for v in values if v.lower() in ("1", "true")][0]
                    falsy = [v for v in values if v != truthy][0]
                    value = truthy if value == "1" else falsy
                row.append("" if value is None else value)
            w.writerow(row)


def write_labels(path, names: Sequence[str], labels: Sequence) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["object", "label"])
        for n, lab in zip(names, labels):
            w.writerow([n, lab])


def read_labels(path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return {row[0]: row[1] for row in reader if row}


# ---------------------------------------------------------------- numbers


def fmt_float(x) -> str:
    if x is None:
        return "null"
    x = float(x)
    if not math.isfinite(x):
        raise FormatError(f"cannot serialise non-finite number {x}")
    return format(x, ".17g")


def _fmt_count(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return fmt_float(x)


# ---------------------------------------------------------------- rules


def rule_record(ctx: Context, r: CausalRule) -> str:
    prem = json.dumps([ctx.literal_label(x) for x in r.premise], ensure_ascii=False)
    return (
        "{"
        f'"premise": {prem}, '
        f'"conclusion": {json.dumps(ctx.literal_label(r.conclusion), ensure_ascii=False)}, '
        f'"n_premise": {_fmt_count(r.n_premise)}, '
        f'"n_both": {_fmt_count(r.n_both)}, '
        f'"eta": {fmt_float(r.eta)}, '
        f'"p_value": {fmt_float(r.p_value)}, '
        f'"chain_len": {int(r.chain_len)}'
        "}"
    )


def dump_rules(ctx: Context, rules: RuleSet, path) -> None:
    header = {
        "format": RULES_FORMAT,
        "mode": rules.mode,
        "alpha": rules.alpha,
        "max_premise_len": rules.max_premise_len,
        "mscr_strict": rules.mscr_strict,
        "count": len(rules),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        for r in rules:
            fh.write(rule_record(ctx, r) + "\n")


def load_rules(ctx: Context, path) -> RuleSet:
    meta = {}
    rules = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{n}: {exc}") from None
            if "format" in rec:
                if rec["format"] != RULES_FORMAT:
                    raise FormatError(f"{path}:{n}: unsupported format {rec['format']!r}")
                meta = rec
                continue
            try:
                rules.append(
                    CausalRule(
                        tuple(ctx.parse_literal(x) for x in rec["premise"]),
                        ctx.parse_literal(rec["conclusion"]),
                        rec["n_premise"],
                        rec["n_both"],
                        rec["eta"],
                        rec["p_value"],
                        rec.get("chain_len", 0),
                    )
                )
            except (KeyError, ContextError, ValueError) as exc:
                raise FormatError(f"{path}:{n}: {exc}") from None
    return RuleSet(
        rules,
        mode=meta.get("mode", "fisher"),
        alpha=meta.get("alpha"),
        max_premise_len=meta.get("max_premise_len"),
        mscr_strict=meta.get("mscr_strict", False),
    )


# ---------------------------------------------------------------- concepts


def concept_record(ctx: Context, c: FixedPointConcept) -> dict:
    return {
        "intent": [ctx.literal_label(x) for x in c.intent.canonical],
        "extent": [ctx.object_names[g] for g in sorted(c.extent)],
        "int_value": c.int_value,
        "seed_count": len(c.seed_objects),
        "consistent": c.consistent,
    }


def dump_concepts_json(ctx: Context, concepts: Iterable[FixedPointConcept], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in concepts:
            rec = concept_record(ctx, c)
            fh.write(
                "{"
                f'"intent": {json.dumps(rec["intent"], ensure_ascii=False)}, '
                f'"extent": {json.dumps(rec["extent"], ensure_ascii=False)}, '
                f'"int_value": {fmt_float(rec["int_value"])}, '
                f'"seed_count": {rec["seed_count"]}, '
                f'"consistent": {json.dumps(rec["consistent"])}'
                "}\n"
            )


def load_concepts_json(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def render_concepts_text(ctx: Context, concepts: Sequence[FixedPointConcept], n_rules: int | None = None) -> str:
    """Human-readable report: each fixed point's literals grouped by source attribute."""
    out = []
    if n_rules == 0:
        out.append("note: empty rule set; every object intent is its own fixed point (degenerate clustering)")
    out.append(f"{len(concepts)} fixed points")
    for k, c in enumerate(concepts, 1):
        flag = "" if c.consistent else "  INCONSISTENT"
        out.append(
            f"concept {k}: seeds={len(c.seed_objects)} extent={len(c.extent)} Int={fmt_float(c.int_value)}{flag}"
        )
        by_attr: dict[str, list[int]] = {}
        for lit in c.intent.canonical:
            by_attr.setdefault(ctx.atoms[atom_of(lit)].attribute, []).append(lit)
        for attr in ctx.schema:
            lits = by_attr.get(attr)
            if not lits:
                continue
            pos = [ctx.literal_label(x) for x in lits if is_positive(x)]
            neg = [ctx.literal_label(x) for x in lits if not is_positive(x)]
            parts = []
            if pos:
                parts.append(" ".join(pos))
            if neg:
                parts.append(" ".join(neg))
            out.append(f"  {attr}: {' '.join(parts)}")
        names = [ctx.object_names[g] for g in sorted(c.extent)]
        out.append(f"  extent: {' '.join(names)}")
    return "\n".join(out) + "\n"


def parse_concepts_text(text: str) -> list[dict]:
    """Recover intent/extent/seed records from :func:`render_concepts_text` output."""
    records = []
    for line in text.splitlines():
        if line.startswith("concept "):
            fields = dict(part.split("=", 1) for part in line.split(": ", 1)[1].split() if "=" in part)
            records.append({"intent": [], "extent": [], "seed_count": int(fields["seeds"]), "int_value": float(fields["Int"])})
        elif line.startswith("  extent:"):
            records[-1]["extent"] = line.split(":", 1)[1].split()
        elif line.startswith("  ") and records:
            records[-1]["intent"].extend(line.split(": ", 1)[1].split())
    for rec in records:
        rec["intent"] = sorted(rec["intent"])
    return records
