"""Prediction operator, closure, and the consistency-maximising operator.

``upsilon_step`` changes a literal set by one literal so that the
consistency score Int strictly grows:

* add a literal predicted by a rule whose premise already holds, when the
  best addition gain is positive and beats the best removal gain;
* remove a literal when the best removal gain is positive and at least the
  best addition gain;
* otherwise the set is a fixed point.

Gains are compared with an absolute tolerance of ``TOL`` so float noise in
sums of equal gammas never produces a spurious step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .context import Context, LiteralSet, object_intent
from .measure import DEFAULT_EPSILON
from .rules import RuleSet

TOL = 1e-9


class FixpointError(RuntimeError):
    pass


class MonotonicityError(FixpointError):
    """A non-fixpoint step failed to increase Int."""


@dataclass(frozen=True)
class FixedPointConcept:
    intent: LiteralSet
    int_value: float
    extent: frozenset[int] = frozenset()
    seed_objects: tuple[int, ...] = ()
    consistent: bool = True


@dataclass
class PredictionState:
    literals: LiteralSet
    sat_rules: tuple[int, ...]
    fal_rules: tuple[int, ...]
    int_value: float


def predict_step(rules: RuleSet, literals: Iterable[int]) -> LiteralSet:
    """``L`` plus the conclusion of every rule whose premise lies in ``L``."""
    L = LiteralSet(literals)
    return LiteralSet(L | {rules[i].conclusion for i in rules.firing(L)})


def closure(rules: RuleSet, literals: Iterable[int]) -> LiteralSet:
    """Least fixed point of :func:`predict_step` containing ``literals``.

    Forward chaining with per-rule counters of unsatisfied premise literals.
    The result may be inconsistent for statistically mined rules; check
    ``.consistent`` on the returned set.
    """
    L = set(LiteralSet(literals))
    index = _premise_index(rules)
    missing = [len(r.premise) for r in rules]
    queue = list(L)
    for i, r in enumerate(rules):
        if not r.premise and r.conclusion not in L:
            L.add(r.conclusion)
            queue.append(r.conclusion)
    while queue:
        lit = queue.pop()
        for i in index.get(lit, ()):
            missing[i] -= 1
            if missing[i] == 0:
                c = rules[i].conclusion
                if c not in L:
                    L.add(c)
                    queue.append(c)
    return LiteralSet(L)


def _premise_index(rules: RuleSet) -> dict[int, list[int]]:
    cached = getattr(rules, "_premise_index_cache", None)
    if cached is None:
        cached = {}
        for i, r in enumerate(rules):
            for lit in r.premise:
                cached.setdefault(lit, []).append(i)
        rules._premise_index_cache = cached
    return cached


def int_criterion(rules: RuleSet, literals: Iterable[int], epsilon: float = DEFAULT_EPSILON):
    """``(Int(L), confirmed rule ids, refuted rule ids)``."""
    L = LiteralSet(literals)
    gammas = _gammas(rules, epsilon)
    sat, fal = [], []
    total = 0.0
    for i in rules.firing(L):
        c = rules[i].conclusion
        if c in L:
            sat.append(i)
            total += gammas[i]
        elif (c ^ 1) in L:
            fal.append(i)
            total -= gammas[i]
    return total, tuple(sat), tuple(fal)


def prediction_state(rules: RuleSet, literals: Iterable[int], epsilon: float = DEFAULT_EPSILON) -> PredictionState:
    L = LiteralSet(literals)
    value, sat, fal = int_criterion(rules, L, epsilon)
    return PredictionState(L, sat, fal, value)


def _gammas(rules: RuleSet, epsilon: float) -> np.ndarray:
    cache = getattr(rules, "_gamma_cache", None)
    if cache is None:
        cache = rules._gamma_cache = {}
    if epsilon not in cache:
        cache[epsilon] = rules.gammas(epsilon)
    return cache[epsilon]


class UpsilonEngine:
    """Holds the compiled rule arrays for repeated operator applications."""

    def __init__(self, rules: RuleSet, epsilon: float = DEFAULT_EPSILON, n_literals: int | None = None):
        self.rules = rules
        self.epsilon = epsilon
        self.ptr, self.lits, self.concl = rules.compiled
        self.gamma = _gammas(rules, epsilon)
        top = max(int(self.lits.max(initial=-1)), int(self.concl.max(initial=-1)))
        self.n_literals = max(n_literals or 0, top + 2 - top % 2 if top >= 0 else 0)
        self.steps = 0

    def _mask(self, L: LiteralSet) -> np.ndarray:
        n = max(self.n_literals, (max(L) | 1) + 1 if L else 0)
        mask = np.zeros(n, dtype=np.bool_)
        if L:
            mask[list(L)] = True
        return mask

    def scores(self, L: LiteralSet):
        mask = self._mask(L)
        if len(self.concl) == 0:
            z = np.zeros(len(mask))
            return 0.0, z, z, np.zeros(len(mask), dtype=bool), mask
        value, dplus, dminus, predicted = _kernels.upsilon_scores(mask, self.ptr, self.lits, self.concl, self.gamma)
        return float(value), dplus, dminus, predicted, mask

    def int_value(self, L: Iterable[int]) -> float:
        return self.scores(LiteralSet(L))[0]

    def step(self, literals: Iterable[int]):
        """One operator application: ``(new set, (action, literal))``."""
        L = LiteralSet(literals)
        value, dplus, dminus, predicted, mask = self.scores(L)
        can_add = predicted & ~mask & ~mask[np.arange(len(mask)) ^ 1]
        add_ids = np.flatnonzero(can_add)
        rem_ids = np.flatnonzero(mask)
        best_add, add_lit = _argmax(dplus, add_ids)
        best_rem, rem_lit = _argmax(dminus, rem_ids)
        if best_add > TOL and best_add > best_rem + TOL:
            return LiteralSet(L | {add_lit}), ("added", add_lit)
        if best_rem > TOL and best_rem >= best_add - TOL:
            return LiteralSet(L - {rem_lit}), ("removed", rem_lit)
        return L, ("fixpoint", None)

    def fixpoint(self, literals: Iterable[int], max_steps: int | None = None) -> FixedPointConcept:
        L = LiteralSet(literals)
        if max_steps is None:
            max_steps = 10 * max(self.n_literals, (max(L) | 1) + 1 if L else 0, 1)
        current = self.int_value(L)
        for _ in range(max_steps):
            nxt, (action, _) = self.step(L)
            if action == "fixpoint":
                return FixedPointConcept(L, current, consistent=L.consistent)
            value = self.int_value(nxt)
            self.steps += 1
            if not value > current:
                raise MonotonicityError(f"Int did not increase: {current!r} -> {value!r} ({action})")
            L, current = nxt, value
        raise FixpointError(f"no fixed point after {max_steps} steps")


def _argmax(values: np.ndarray, ids: np.ndarray):
    if ids.size == 0:
        return -np.inf, None
    sub = values[ids]
    top = sub.max()
    # smallest literal code among near-ties
    return float(top), int(ids[np.flatnonzero(sub >= top - TOL)[0]])


def upsilon_step(rules: RuleSet, literals: Iterable[int], epsilon: float = DEFAULT_EPSILON):
    return UpsilonEngine(rules, epsilon).step(literals)


def upsilon_fixpoint(
    rules: RuleSet, literals: Iterable[int], epsilon: float = DEFAULT_EPSILON, max_steps: int | None = None
) -> FixedPointConcept:
    return UpsilonEngine(rules, epsilon).fixpoint(literals, max_steps)


def cluster(
    ctx: Context,
    rules: RuleSet,
    epsilon: float = DEFAULT_EPSILON,
    operator: str = "upsilon",
    engine: UpsilonEngine | None = None,
) -> list[FixedPointConcept]:
    """Fixed points reached from every object's intent.

    Objects with identical intents are run once. The extent of a fixed point
    is the set of objects whose intents converge to it.
    """
    if operator not in ("upsilon", "closure"):
        raise ValueError(f"operator must be 'upsilon' or 'closure', got {operator!r}")
    if operator == "upsilon":
        engine = engine or UpsilonEngine(rules, epsilon, ctx.n_literals)
    memo: dict[LiteralSet, LiteralSet] = {}
    groups: dict[LiteralSet, list[int]] = {}
    for g in range(ctx.n_objects):
        start = object_intent(ctx, g)
        if start not in memo:
            if operator == "upsilon":
                memo[start] = engine.fixpoint(start).intent
            else:
                memo[start] = closure(rules, start)
        groups.setdefault(memo[start], []).append(g)

    concepts = []
    for intent, seeds in groups.items():
        value = engine.int_value(intent) if engine else int_criterion(rules, intent, epsilon)[0]
        concepts.append(
            FixedPointConcept(intent, value, frozenset(seeds), tuple(seeds), consistent=intent.consistent)
        )
    concepts.sort(key=lambda c: (-len(c.seed_objects), c.intent.canonical))
    return concepts


def classify(
    ctx: Context,
    rules: RuleSet,
    concepts: Sequence[FixedPointConcept],
    literals: Iterable[int],
    epsilon: float = DEFAULT_EPSILON,
) -> int | None:
    """Index of the concept a literal set belongs to.

    The set is first driven to its own fixed point; the concept whose intent
    shares the highest-Int part with it wins (ties go to the earlier concept).
    """
    if not concepts:
        return None
    engine = UpsilonEngine(rules, epsilon, ctx.n_literals)
    reached = engine.fixpoint(literals).intent
    best, best_score = None, -np.inf
    for i, c in enumerate(concepts):
        if c.intent == reached:
            return i
        score = engine.int_value(reached & c.intent)
        if score > best_score + TOL:
            best, best_score = i, score
    return best
