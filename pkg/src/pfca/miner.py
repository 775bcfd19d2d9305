"""Semantic probabilistic inference: search for strongest causal rules.

Exact mode enumerates every premise with positive support up to the length
cap, level by level, and keeps the causal rules that have no causal strict
refinement. Causality is decided with the running maximum of eta over all
sub-premises, so each premise costs one lookup per literal instead of a
subset scan.

Fisher mode walks refinement chains from the empty premise: a literal may be
added when it strictly raises eta and the one-sided Fisher test on the
added literal vs. the conclusion (restricted to the current premise) has
p < alpha. Nodes are keyed by their object extent, since every admissible
extension depends only on it; the first premise reaching an extent (shortest,
then smallest p, then smallest literal code) represents it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np

from . import _kernels
from .config import ConfigError, RunConfig, thread_count
from .context import Context, atom_of
from .measure import Measure
from .rules import CausalRule, RuleSet

log = logging.getLogger(__name__)

EXACT_ATOM_LIMIT = 20


class SearchError(RuntimeError):
    pass


def _candidate_literals(ctx: Context, conclusion: int) -> list[int]:
    skip = atom_of(conclusion)
    return [lit for lit in range(ctx.n_literals) if atom_of(lit) != skip]


def _exact_chains(ctx: Context, measure: Measure, conclusion: int, cap: int) -> list[CausalRule]:
    if ctx.n_atoms > EXACT_ATOM_LIMIT:
        raise SearchError(f"exact search refused on {ctx.n_atoms} atoms (limit {EXACT_ATOM_LIMIT})")
    cols = ctx.literal_matrix
    concl_col = cols[:, conclusion]
    cands = _candidate_literals(ctx, conclusion)

    # premise -> (mass, mass with conclusion, eta, max eta over sub-premises incl. itself, causal)
    table: dict[tuple[int, ...], tuple] = {}
    masks: dict[tuple[int, ...], np.ndarray] = {}
    root = np.ones(ctx.n_objects, dtype=bool)
    prem = measure.mass(root)
    if prem == 0:
        return []
    both = measure.mass(root & concl_col)
    e = both / prem
    table[()] = (prem, both, e, e, True)
    masks[()] = root
    level = [()]
    for _ in range(cap):
        nxt = []
        for p in level:
            base = masks[p]
            used = {atom_of(x) for x in p}
            start = p[-1] + 1 if p else 0
            for lit in cands:
                if lit < start or atom_of(lit) in used:
                    continue
                mask = base & cols[:, lit]
                prem = measure.mass(mask)
                if prem == 0:
                    continue
                q = p + (lit,)
                both = measure.mass(mask & concl_col)
                e = both / prem
                below = max(table[q[:i] + q[i + 1:]][3] for i in range(len(q)))
                table[q] = (prem, both, e, max(e, below), e > below)
                masks[q] = mask
                nxt.append(q)
        level = nxt
        if not level:
            break
        for p in list(masks):
            if len(p) < len(level[0]) - 1:
                del masks[p]

    causal = [p for p, row in table.items() if row[4]]
    causal_set = set(causal)
    dominated = set()
    longest: dict[tuple[int, ...], int] = {}
    for p in sorted(causal, key=len):
        best = 0
        for k in range(len(p)):
            for sub in combinations(p, k):
                if sub in causal_set:
                    dominated.add(sub)
                    best = max(best, longest[sub] + 1)
        longest[p] = best

    out = []
    for p in causal:
        if p in dominated:
            continue
        prem, both, e, _, _ = table[p]
        out.append(CausalRule(p, conclusion, prem, both, e, None, longest[p]))
    return out


def _fisher_chains(
    ctx: Context, conclusion: int, alpha: float, cap: int, beam: int | None
) -> list[CausalRule]:
    cols = ctx.literal_bitsets
    concl_bits = cols[conclusion]
    log_alpha = math.log(alpha)
    concl_atom = atom_of(conclusion)
    atom_ids = np.arange(ctx.n_literals) >> 1
    atom_blocked = atom_ids == concl_atom

    root = _kernels.full_bitset(ctx.n_objects)
    n_root = ctx.n_objects
    if n_root == 0:
        return []
    n_root_both = int(_kernels.popcount(root & concl_bits))
    seen = {root.tobytes()}
    # (premise, extent bits, n_premise, n_both, p-value of the step into it)
    level = [((), root, n_root, n_root_both, None)]
    out = []
    depth = 0
    while level:
        nxt = []
        for premise, ext, n_p, n_b, pval in level:
            if n_b == n_p or depth >= cap:
                if premise:
                    out.append(CausalRule(premise, conclusion, n_p, n_b, n_b / n_p, pval, len(premise)))
                continue
            blocked = atom_blocked.copy()
            for lit in premise:
                blocked[atom_ids == atom_of(lit)] = True
            lits, logp, c_prem, c_both = _kernels.fisher_expand(
                ext, ext & concl_bits, cols, blocked, n_p, n_b, log_alpha
            )
            if lits.size == 0:
                if premise:
                    out.append(CausalRule(premise, conclusion, n_p, n_b, n_b / n_p, pval, len(premise)))
                continue
            if beam is not None:
                lits, logp, c_prem, c_both = lits[:beam], logp[:beam], c_prem[:beam], c_both[:beam]
            for lit, lp, c_p, c_b in zip(lits.tolist(), logp.tolist(), c_prem.tolist(), c_both.tolist()):
                child = ext & cols[lit]
                key = child.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                assert c_b * n_p > n_b * c_p, "refinement chain must strictly increase eta"
                nxt.append((tuple(sorted(premise + (lit,))), child, c_p, c_b, math.exp(lp)))
        level = nxt
        depth += 1
    return out


def spi_chains(ctx: Context, measure: Measure | None, conclusion: int, config: RunConfig | None = None) -> list[CausalRule]:
    """Terminal rules of the refinement tree for one conclusion literal."""
    config = config or RunConfig()
    measure = measure or Measure.uniform_over(ctx)
    cap = config.premise_cap
    if config.mode == "exact":
        rules = _exact_chains(ctx, measure, conclusion, cap)
    else:
        if not measure.uniform:
            raise ConfigError("the Fisher gate needs integer counts; non-uniform measures are not supported")
        rules = _fisher_chains(ctx, conclusion, config.alpha, cap, config.beam_width)
    rules.sort(key=lambda r: (len(r.premise), r.premise))
    return rules


def mine_mscr(ctx: Context, measure: Measure | None = None, config: RunConfig | None = None) -> RuleSet:
    """Mine terminal rules for every literal (both signs of every atom)."""
    config = config or RunConfig()
    if ctx.n_objects == 0:
        return _wrap([], config)
    measure = measure or Measure.uniform_over(ctx)
    conclusions = list(range(ctx.n_literals))

    def work(c):
        found = spi_chains(ctx, measure, c, config)
        if config.mode == "exact" and config.mscr_strict and found:
            top = max(r.eta for r in found)
            found = [r for r in found if r.eta == top]
        return found

    threads = thread_count(config.threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, conclusions))
    else:
        chunks = [work(c) for c in conclusions]
    rules = [r for chunk in chunks for r in chunk]
    log.info("mined %d rules (%s mode)", len(rules), config.mode)
    return _wrap(rules, config)


def _wrap(rules, config: RunConfig) -> RuleSet:
    return RuleSet(
        rules,
        mode=config.mode,
        alpha=config.alpha if config.mode == "fisher" else None,
        max_premise_len=config.premise_cap,
        mscr_strict=config.mscr_strict,
    )
