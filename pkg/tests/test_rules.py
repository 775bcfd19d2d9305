import numpy as np
import pytest

from pfca.measure import UndefinedProbability
from pfca.rules import CausalRule, RuleSet, annotate, is_probabilistic_causal, is_subrelation, refines, rule


def test_rule_validation():
    r = CausalRule((4, 0), 2)
    assert r.premise == (0, 4)
    with pytest.raises(ValueError):
        CausalRule((2,), 2)
    with pytest.raises(ValueError):
        CausalRule((3,), 2)
    with pytest.raises(ValueError):
        CausalRule((0, 1), 4)


def test_subrelation(lit):
    c, b, a = lit("+c"), lit("+b"), lit("+a")
    assert is_subrelation(rule([], c), rule([b], c))
    assert not is_subrelation(rule([b], c), rule([b], c))
    assert not is_subrelation(rule([a], c), rule([b], c))
    assert not is_subrelation(rule([], b), rule([a], c))


def test_refines(ctx_a, lit):
    c, b, a = lit("+c"), lit("+b"), lit("+a")
    assert refines(ctx_a, None, rule([b], c), rule([], c))
    assert refines(ctx_a, None, rule([a], b), rule([], b))
    # equal eta: (a, c -> b) and (a -> b) are both 1
    assert not refines(ctx_a, None, rule([a, c], b), rule([a], b))


def test_refines_undefined_raises(ctx_a, lit):
    with pytest.raises(UndefinedProbability):
        refines(ctx_a, None, rule([lit("-b"), lit("+a")], lit("+c")), rule([], lit("+c")))


def test_probabilistic_causal(ctx_a, lit):
    a, b, c = lit("+a"), lit("+b"), lit("+c")
    assert is_probabilistic_causal(ctx_a, None, rule([b], c))
    assert is_probabilistic_causal(ctx_a, None, rule([a], b))
    assert is_probabilistic_causal(ctx_a, None, rule([], c))
    # (a, c -> b) has eta 1 but so does its sub-rule (a -> b)
    assert not is_probabilistic_causal(ctx_a, None, rule([a, c], b))


def test_rule_set_dedup_sort_and_index():
    rs = RuleSet([CausalRule((2,), 5, eta=0.5), CausalRule((0,), 2, eta=1.0), CausalRule((2,), 5, eta=0.9)])
    assert len(rs) == 2
    assert [r.conclusion for r in rs] == [2, 5]
    assert rs[1].eta == 0.5  # first occurrence wins
    assert CausalRule((0,), 2) in rs and (5, (2,)) in rs
    assert rs.by_conclusion == {2: [0], 5: [1]}
    ptr, lits, concl = rs.compiled
    assert ptr.tolist() == [0, 1, 2] and lits.tolist() == [0, 2] and concl.tolist() == [2, 5]
    assert rs.firing({0}) == [0]
    np.testing.assert_allclose(rs.gammas(1e-4), [9.21034037, -np.log1p(1e-4 - 0.5)], rtol=1e-8)


def test_annotate(ctx_a, lit):
    (r,) = annotate(ctx_a, None, [rule([lit("+b")], lit("+c"))])
    assert (r.n_premise, r.n_both) == (3, 2) and r.eta == pytest.approx(2 / 3)
