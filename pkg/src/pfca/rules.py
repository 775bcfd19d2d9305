"""Causal rules, rule sets and the exact-measure rule predicates."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .context import Context, LiteralSet
from .measure import DEFAULT_EPSILON, Measure, UndefinedProbability, eta, gamma


@dataclass(frozen=True)
class CausalRule:
    """``premise -> conclusion`` with cached support counts.

    ``n_premise``/``n_both`` are object counts (measure masses for a
    non-uniform measure); ``p_value`` is the Fisher p-value of the last
    refinement step and is None for exact-mode or empty-premise rules.
    """

    premise: tuple[int, ...]
    conclusion: int
    n_premise: float = 0
    n_both: float = 0
    eta: float | None = None
    p_value: float | None = None
    chain_len: int = 0

    def __post_init__(self):
        prem = tuple(sorted(set(int(x) for x in self.premise)))
        object.__setattr__(self, "premise", prem)
        c = int(self.conclusion)
        object.__setattr__(self, "conclusion", c)
        if c in prem or (c ^ 1) in prem:
            raise ValueError("conclusion (or its negation) occurs in the premise")
        if not LiteralSet(prem).consistent:
            raise ValueError(f"inconsistent premise {prem}")

    @property
    def key(self) -> tuple[int, tuple[int, ...]]:
        return (self.conclusion, self.premise)

    @property
    def length(self) -> int:
        return len(self.premise)

    def with_premise(self, premise: Iterable[int]) -> "CausalRule":
        return CausalRule(tuple(premise), self.conclusion)


def rule(premise: Iterable[int], conclusion: int) -> CausalRule:
    return CausalRule(tuple(premise), conclusion)


def sort_key(r: CausalRule):
    return (r.conclusion, len(r.premise), r.premise)


class RuleSet:
    """Deduplicated rules with lookup by conclusion and by satisfied premise."""

    def __init__(
        self,
        rules: Iterable[CausalRule] = (),
        *,
        mode: str = "exact",
        alpha: float | None = None,
        max_premise_len: int | None = None,
        mscr_strict: bool = False,
    ):
        seen = {}
        for r in rules:
            seen.setdefault(r.key, r)
        self.rules: list[CausalRule] = sorted(seen.values(), key=sort_key)
        self.mode = mode
        self.alpha = alpha
        self.max_premise_len = max_premise_len
        self.mscr_strict = mscr_strict

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    def __contains__(self, item):
        if isinstance(item, CausalRule):
            item = item.key
        return item in self._keys

    @cached_property
    def _keys(self) -> dict:
        return {r.key: i for i, r in enumerate(self.rules)}

    @cached_property
    def by_conclusion(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, r in enumerate(self.rules):
            out.setdefault(r.conclusion, []).append(i)
        return out

    def index_of(self, r: CausalRule) -> int:
        return self._keys[r.key]

    @cached_property
    def compiled(self):
        """CSR arrays ``(ptr, premise literals, conclusions)`` for the kernels."""
        lengths = np.array([len(r.premise) for r in self.rules], dtype=np.int64)
        ptr = np.zeros(len(self.rules) + 1, dtype=np.int64)
        np.cumsum(lengths, out=ptr[1:])
        lits = np.fromiter((x for r in self.rules for x in r.premise), dtype=np.int64, count=int(ptr[-1]))
        concl = np.array([r.conclusion for r in self.rules], dtype=np.int64)
        return ptr, lits, concl

    def gammas(self, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
        return np.array([gamma(r.eta, epsilon) for r in self.rules], dtype=np.float64)

    def firing(self, literals: Iterable[int]) -> list[int]:
        """Indices of rules whose premise is contained in ``literals``."""
        L = set(literals)
        return [i for i, r in enumerate(self.rules) if all(x in L for x in r.premise)]


def is_subrelation(r1: CausalRule, r2: CausalRule) -> bool:
    """Same conclusion and strictly smaller premise."""
    return r1.conclusion == r2.conclusion and set(r1.premise) < set(r2.premise)


def _eta_or_raise(ctx, measure, r):
    value = eta(ctx, measure, r)
    if value is None:
        raise UndefinedProbability(f"premise of {r} has zero measure")
    return value


def refines(ctx: Context, measure: Measure | None, r1: CausalRule, r2: CausalRule) -> bool:
    """True when ``r1`` refines ``r2``: r2 is a sub-relation of r1 and eta(r1) > eta(r2)."""
    e1 = _eta_or_raise(ctx, measure, r1)
    e2 = _eta_or_raise(ctx, measure, r2)
    return is_subrelation(r2, r1) and e1 > e2


def is_probabilistic_causal(
    ctx: Context, measure: Measure | None, r: CausalRule, max_premise_len: int = 12
) -> bool:
    """Every proper sub-premise rule has strictly smaller probability.

    A sub-premise with zero measure counts as a failure.
    """
    if len(r.premise) > max_premise_len:
        raise ValueError(f"premise longer than {max_premise_len}; subset check refused")
    top = _eta_or_raise(ctx, measure, r)
    for k in range(len(r.premise)):
        for sub in combinations(r.premise, k):
            value = eta(ctx, measure, CausalRule(sub, r.conclusion))
            if value is None or not value < top:
                return False
    return True


def annotate(ctx: Context, measure: Measure | None, rules: Sequence[CausalRule]) -> list[CausalRule]:
    """Fill in counts and eta from the data."""
    from .measure import rule_counts

    out = []
    for r in rules:
        prem, both = rule_counts(ctx, measure, r.premise, r.conclusion)
        out.append(
            CausalRule(r.premise, r.conclusion, prem, both, both / prem if prem else None, r.p_value, r.chain_len)
        )
    return out
