"""Brute-force reference implementations for toy contexts.

Nothing here shares code paths with the miner or the fixpoint engine beyond
the context representation: probabilities are exact fractions computed by
scanning objects, causality is a full subset check, and closures are naive
iteration of the prediction operator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb

from .config import RunConfig
from .context import (
    Context,
    LiteralSet,
    build_context,
    enumerate_formal_concepts,
    object_intent,
    positive,
)
from .rules import CausalRule, RuleSet

EVALUATION_CAP = 10**7
MAX_OBJECTS = 8
MAX_ATOMS = 5
MAX_PREMISE = 3


class BudgetError(ValueError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_objects: int = 8
    max_atoms: int = 5
    max_premise: int = 3

    def __post_init__(self):
        if min(self.max_objects, self.max_atoms, self.max_premise) < 1:
            raise BudgetError("budget fields must be positive")
        if self.max_objects > MAX_OBJECTS or self.max_atoms > MAX_ATOMS or self.max_premise > MAX_PREMISE:
            raise BudgetError(
                f"budget {self} exceeds the oracle limits "
                f"({MAX_OBJECTS} objects, {MAX_ATOMS} atoms, premise {MAX_PREMISE})"
            )
        if self.evaluations(self.max_objects, self.max_atoms) > EVALUATION_CAP:
            raise BudgetError(f"budget {self} exceeds {EVALUATION_CAP} evaluations")

    def evaluations(self, n_objects: int, n_atoms: int) -> int:
        # conclusions x premises x subsets checked x objects scanned
        per_conclusion = sum(
            comb(n_atoms - 1, k) * 2**k * 2**k for k in range(min(self.max_premise, n_atoms - 1) + 1)
        )
        return 2 * n_atoms * per_conclusion * max(n_objects, 1)

    def check(self, ctx: Context):
        if ctx.n_objects > self.max_objects or ctx.n_atoms > self.max_atoms:
            raise BudgetError(
                f"context {ctx.n_objects}x{ctx.n_atoms} exceeds budget {self.max_objects}x{self.max_atoms}"
            )


def _holds(ctx: Context, g: int, lit: int) -> bool:
    a = lit >> 1
    if not ctx.known[g, a]:
        return False
    return bool(ctx.incidence[g, a]) == (lit & 1 == 0)


def _extent(ctx: Context, literals) -> list[int]:
    return [g for g in range(ctx.n_objects) if all(_holds(ctx, g, x) for x in literals)]


def _eta(ctx: Context, premise, conclusion) -> Fraction | None:
    ext = _extent(ctx, premise)
    if not ext:
        return None
    return Fraction(sum(1 for g in ext if _holds(ctx, g, conclusion)), len(ext))


def _premises(ctx: Context, conclusion: int, max_len: int):
    atoms = [a for a in range(ctx.n_atoms) if a != conclusion >> 1]
    for k in range(min(max_len, len(atoms)) + 1):
        for chosen in combinations(atoms, k):
            for signs in product((0, 1), repeat=k):
                yield tuple(2 * a + s for a, s in zip(chosen, signs))


def _is_causal(ctx: Context, premise, conclusion, top: Fraction) -> bool:
    for k in range(len(premise)):
        for sub in combinations(premise, k):
            e = _eta(ctx, sub, conclusion)
            if e is None or not e < top:
                return False
    return True


def brute_force_causal_rules(ctx: Context, budget: OracleBudget | None = None) -> list[CausalRule]:
    budget = budget or OracleBudget()
    budget.check(ctx)
    out = []
    for c in range(ctx.n_literals):
        for premise in _premises(ctx, c, budget.max_premise):
            e = _eta(ctx, premise, c)
            if e is None:
                continue
            if _is_causal(ctx, premise, c, e):
                n = len(_extent(ctx, premise))
                out.append(CausalRule(premise, c, n, int(e * n), float(e)))
    out.sort(key=lambda r: (r.conclusion, len(r.premise), r.premise))
    return out


def brute_force_terminals(ctx: Context, budget: OracleBudget | None = None) -> list[CausalRule]:
    causal = brute_force_causal_rules(ctx, budget)
    by_concl: dict[int, list[frozenset]] = {}
    for r in causal:
        by_concl.setdefault(r.conclusion, []).append(frozenset(r.premise))
    return [
        r
        for r in causal
        if not any(frozenset(r.premise) < other for other in by_concl[r.conclusion])
    ]


def naive_closure(rules, literals) -> frozenset[int]:
    L = frozenset(literals)
    while True:
        nxt = L | {r.conclusion for r in rules if set(r.premise) <= L}
        if nxt == L:
            return L
        L = nxt


def all_literal_sets(n_atoms: int):
    """Every consistent literal set over ``n_atoms`` atoms (3**n of them)."""
    for choice in product((None, 0, 1), repeat=n_atoms):
        yield frozenset(2 * a + s for a, s in enumerate(choice) if s is not None)


def probabilistic_concepts(ctx: Context, rules) -> dict[frozenset, frozenset]:
    """``intent -> extent`` for every closure fixed point, extents unioned over all seeds."""
    out: dict[frozenset, set] = {}
    for C in all_literal_sets(ctx.n_atoms):
        T = naive_closure(rules, C)
        out.setdefault(T, set()).update(_extent(ctx, C))
    return {T: frozenset(S) for T, S in out.items()}


def literal_concepts(ctx: Context) -> set[tuple[frozenset, frozenset]]:
    """Classical concepts of the negation-completed context (literals as attributes).

    Objects are scanned by subset, so this is only for oracle-sized contexts.
    """
    holds = [frozenset(l for l in range(ctx.n_literals) if _holds(ctx, g, l)) for g in range(ctx.n_objects)]
    everything = frozenset(range(ctx.n_literals))
    out = set()
    for k in range(ctx.n_objects + 1):
        for A in combinations(range(ctx.n_objects), k):
            B = everything.intersection(*(holds[g] for g in A))
            closed = frozenset(g for g in range(ctx.n_objects) if B <= holds[g])
            out.add((closed, B))
    return out


def random_context(rng: random.Random, max_objects: int = 8, max_atoms: int = 5, density: float = 0.5) -> Context:
    n = rng.randint(1, max_objects)
    m = rng.randint(1, max_atoms)
    schema = {f"a{j}": ("0", "1") for j in range(m)}
    rows = [
        (f"g{i + 1}", {f"a{j}": "1" if rng.random() < density else "0" for j in range(m)}) for i in range(n)
    ]
    return build_context(rows, schema)


def random_compatible_seeds(ctx: Context, rng: random.Random, trials: int) -> list[LiteralSet]:
    """Every object intent plus ``trials`` random sub-sets of object intents."""
    seeds = [object_intent(ctx, g) for g in range(ctx.n_objects)]
    for _ in range(trials if ctx.n_objects else 0):
        full = sorted(object_intent(ctx, rng.randrange(ctx.n_objects)))
        seeds.append(LiteralSet(x for x in full if rng.random() < 0.5))
    return seeds


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class TheoremReport:
    results: dict[str, PropertyResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def lines(self) -> list[str]:
        out = []
        for r in self.results.values():
            status = "PASS" if r.passed else "FAIL"
            out.append(f"{status} {r.name}: {r.checked} checked, {len(r.failures)} failed")
            for f in r.failures[:3]:
                out.append(f"    counterexample: {f}")
        return out

    def merge(self, other: "TheoremReport") -> "TheoremReport":
        for key, r in other.results.items():
            mine = self.results.setdefault(key, PropertyResult(r.name))
            mine.checked += r.checked
            mine.failures.extend(r.failures)
        return self


THEOREMS = {
    "t1": "closure of a compatible seed is consistent and compatible",
    "t2_embed": "every classical concept embeds into a probabilistic concept",
    "t2_union": "probabilistic extent = union of classical extents closing to its intent",
    "t3": "upsilon fixed point equals closure",
    "t3_sound": "upsilon fixed point equals closure whenever the closure is consistent and compatible",
}


def verify_theorems(
    ctx: Context,
    budget: OracleBudget | None = None,
    trials: int = 20,
    seed: int = 0,
    epsilon: float = 1e-4,
) -> TheoremReport:
    """Check the consistency, concept-correspondence and operator-equivalence properties."""
    from .fixpoint import UpsilonEngine, closure
    from .miner import mine_mscr

    budget = budget or OracleBudget()
    budget.check(ctx)
    rng = random.Random(seed)
    res = {k: PropertyResult(v) for k, v in THEOREMS.items()}
    rules: RuleSet = mine_mscr(ctx, None, RunConfig(mode="exact", max_premise_len=budget.max_premise))
    rule_list = list(rules)
    names = ctx.object_names

    def show(L):
        return "{" + ", ".join(ctx.literal_label(x) for x in sorted(L)) + "}"

    seeds = random_compatible_seeds(ctx, rng, trials)
    engine = UpsilonEngine(rules, epsilon, ctx.n_literals)
    for L in seeds:
        closed = closure(rules, L)
        naive = naive_closure(rule_list, L)
        res["t1"].checked += 1
        if closed != naive or not closed.consistent or not _extent(ctx, closed):
            res["t1"].failures.append(f"seed {show(L)} -> {show(closed)}")
        res["t3"].checked += 1
        reached = engine.fixpoint(L).intent
        if reached != closed:
            res["t3"].failures.append(f"seed {show(L)}: upsilon {show(reached)} vs closure {show(closed)}")
        if closed.consistent and _extent(ctx, closed):
            res["t3_sound"].checked += 1
            if reached != closed:
                res["t3_sound"].failures.append(f"seed {show(L)}: upsilon {show(reached)} vs closure {show(closed)}")

    pconcepts = probabilistic_concepts(ctx, rule_list)
    classical = enumerate_formal_concepts(ctx)
    for A, B in classical:
        res["t2_embed"].checked += 1
        Bl = {positive(a) for a in B}
        if not any(A <= S and Bl <= T for T, S in pconcepts.items()):
            res["t2_embed"].failures.append(
                f"classical ({sorted(names[g] for g in A)}, {show(Bl)}) has no probabilistic superconcept"
            )
    # the union runs over concepts of the negation-completed context: positive-only
    # intents can never close onto intents that carry negative literals
    closes_to: dict[frozenset, set] = {}
    for A, B in literal_concepts(ctx):
        T = naive_closure(rule_list, B)
        closes_to.setdefault(T, set()).update(A)
    for T, S in pconcepts.items():
        res["t2_union"].checked += 1
        union = frozenset(closes_to.get(T, ()))
        if union != S:
            res["t2_union"].failures.append(
                f"intent {show(T)}: extent {sorted(names[g] for g in S)} vs classical union {sorted(names[g] for g in union)}"
            )
    return TheoremReport(res)


def verify_random(
    n_contexts: int, budget: OracleBudget | None = None, seed: int = 0, trials: int = 20
) -> TheoremReport:
    budget = budget or OracleBudget()
    rng = random.Random(seed)
    report = TheoremReport({k: PropertyResult(v) for k, v in THEOREMS.items()})
    for i in range(n_contexts):
        ctx = random_context(rng, budget.max_objects, budget.max_atoms)
        report.merge(verify_theorems(ctx, budget, trials, seed=seed * 1_000_003 + i))
    return report
