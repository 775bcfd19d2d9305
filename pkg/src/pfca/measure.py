"""Empirical measure over objects, rule probability, Fisher gate and gamma score."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .context import Context, LiteralSet

DEFAULT_EPSILON = 1e-4


class UndefinedProbability(ValueError):
    """A conditional probability was requested on a zero-measure premise."""


class ContractWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Measure:
    """Per-object probability weights.

    Uniform measures keep integer counts around so rule probabilities are
    ratios of integers and equal rationals compare equal.
    """

    weights: np.ndarray
    uniform: bool

    @classmethod
    def uniform_over(cls, ctx_or_n) -> "Measure":
        n = ctx_or_n if isinstance(ctx_or_n, int) else ctx_or_n.n_objects
        if n <= 0:
            raise ValueError("a measure needs at least one object")
        w = np.full(n, 1.0 / n)
        w.setflags(write=False)
        return cls(w, True)

    @classmethod
    def from_weights(cls, weights: Iterable[float]) -> "Measure":
        w = np.asarray(list(weights), dtype=np.float64)
        if w.size == 0:
            raise ValueError("a measure needs at least one object")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("object weights must be finite and strictly positive")
        uniform = bool(np.all(w == w[0]))
        w = w / w.sum()
        w.setflags(write=False)
        return cls(w, uniform)

    def mass(self, mask: np.ndarray):
        """Measure of the objects selected by ``mask``: an int count when uniform."""
        if self.uniform:
            return int(np.count_nonzero(mask))
        return float(self.weights[mask].sum())

    @property
    def total(self):
        return len(self.weights) if self.uniform else 1.0


def _resolve(ctx: Context, measure: Measure | None) -> Measure:
    if measure is None:
        return Measure.uniform_over(ctx)
    if len(measure.weights) != ctx.n_objects:
        raise ValueError("measure and context disagree on the number of objects")
    return measure


def nu(ctx: Context, measure: Measure | None, literals: Iterable[int]) -> float:
    """Probability that an object satisfies every literal (1.0 for the empty set)."""
    L = LiteralSet(literals)
    if not L.consistent:
        warnings.warn(f"nu() called on an inconsistent literal set {L!r}", ContractWarning, stacklevel=2)
        return 0.0
    m = _resolve(ctx, measure)
    return m.mass(ctx.extent_mask(L)) / m.total


def rule_counts(ctx: Context, measure: Measure | None, premise: Iterable[int], conclusion: int):
    """``(mass of premise, mass of premise and conclusion)`` under the measure."""
    m = _resolve(ctx, measure)
    mask = ctx.extent_mask(premise)
    both = mask & ctx.literal_matrix[:, conclusion]
    return m.mass(mask), m.mass(both)


def eta(ctx: Context, measure: Measure | None, rule) -> float | None:
    """Conditional probability of a rule's conclusion given its premise.

    Returns ``None`` when the premise has measure zero.
    """
    premise = LiteralSet(rule.premise)
    c = rule.conclusion
    if c in premise or (c ^ 1) in premise:
        raise ValueError("conclusion (or its negation) occurs in the premise")
    if not premise.consistent:
        raise ValueError("premise is inconsistent")
    prem, both = rule_counts(ctx, measure, premise, c)
    if prem == 0:
        return None
    return both / prem


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Object counts: rows split on the added condition, columns on the conclusion."""

    n11: int
    n10: int
    n01: int
    n00: int

    def __post_init__(self):
        cells = (self.n11, self.n10, self.n01, self.n00)
        if any(int(c) != c or c < 0 for c in cells):
            raise ValueError(f"table cells must be nonnegative integers: {cells}")
        if sum(cells) == 0:
            raise ValueError("contingency table has zero total")

    @classmethod
    def from_rows(cls, rows) -> "ContingencyTable2x2":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))


def fisher_log_pvalue(table: ContingencyTable2x2) -> float:
    """Natural log of the one-sided Fisher p-value, P(X >= n11) with margins fixed."""
    return float(_kernels.fisher_log_greater(int(table.n11), int(table.n10), int(table.n01), int(table.n00)))


def fisher_one_sided(table: ContingencyTable2x2 | tuple) -> float:
    """One-sided (enrichment) Fisher exact test p-value.

    The alternative is that the conclusion is more frequent in the first row
    (condition present) than in the second.

    >>> fisher_one_sided(ContingencyTable2x2(2, 0, 1, 1))
    0.5
    """
    if not isinstance(table, ContingencyTable2x2):
        table = ContingencyTable2x2.from_rows(table)
    return min(1.0, math.exp(fisher_log_pvalue(table)))


def gamma(eta_value: float | None, epsilon: float = DEFAULT_EPSILON) -> float:
    """Rule weight ``-ln(1 + epsilon - eta)``; positive exactly when eta > epsilon."""
    if eta_value is None:
        raise UndefinedProbability("gamma of a rule with undefined probability")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return -math.log1p(epsilon - eta_value)
