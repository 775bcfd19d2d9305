import random
from fractions import Fraction

import pytest

from pfca import oracle
from pfca.oracle import BudgetError, OracleBudget

from conftest import boolean_context


def test_ctx_a_causal_rules_include_spec_examples(ctx_a, lit):
    keys = {r.key for r in oracle.brute_force_causal_rules(ctx_a)}
    assert (lit("+b"), (lit("+a"),)) in keys
    assert (lit("+c"), (lit("+b"),)) in keys
    # c -> b has eta 1 against 3/4 for the empty premise: also causal
    assert (lit("+b"), (lit("+c"),)) in keys


def test_ctx_a_terminals(ctx_a, lit):
    terms = oracle.brute_force_terminals(ctx_a)
    assert (lit("+b"), (lit("+a"),)) in {r.key for r in terms}
    assert all(r.eta == Fraction(1) for r in terms)


def test_constant_atom_only_empty_premises():
    ctx = boolean_context([(1,), (1,)])
    assert all(r.premise == () for r in oracle.brute_force_terminals(ctx))


def test_oracle_is_deterministic():
    ctx = oracle.random_context(random.Random(4), 3, 3)
    assert oracle.brute_force_terminals(ctx) == oracle.brute_force_terminals(ctx)


def test_budget_guards():
    with pytest.raises(BudgetError):
        OracleBudget(max_objects=9)
    with pytest.raises(BudgetError):
        OracleBudget(max_premise=0)
    big = boolean_context([(0,) * 6])
    with pytest.raises(BudgetError):
        oracle.brute_force_terminals(big)


def test_naive_closure():
    from pfca.rules import CausalRule

    rules = [CausalRule((0,), 2), CausalRule((2,), 4)]
    assert oracle.naive_closure(rules, {0}) == {0, 2, 4}


def test_all_literal_sets_count():
    sets = list(oracle.all_literal_sets(3))
    assert len(sets) == 27 and len(set(sets)) == 27


def test_literal_concepts_are_closed(ctx_a):
    for A, B in oracle.literal_concepts(ctx_a):
        assert set(A) == set(ctx_a.extent_mask(B).nonzero()[0])


def test_ctx_a_all_properties_pass(ctx_a):
    report = oracle.verify_theorems(ctx_a)
    assert report.passed, report.lines()


def test_single_object_context():
    # every empty-premise rule is vacuously causal and terminal, including the eta = 0
    # ones such as 0 -> -a0, so closure adds contradicting literals; only the concept
    # correspondences survive
    report = oracle.verify_theorems(boolean_context([(1, 0, 1)]))
    assert report.results["t2_embed"].passed and report.results["t2_union"].passed
    assert not report.results["t1"].passed


def test_report_lines_and_merge():
    r = oracle.TheoremReport({"t1": oracle.PropertyResult("x", 2, ["bad"])})
    assert r.lines()[0].startswith("FAIL x: 2 checked, 1 failed")
    r.merge(oracle.TheoremReport({"t1": oracle.PropertyResult("x", 3)}))
    assert r.results["t1"].checked == 5


def test_random_suite_theorem_two_and_conditional_three_hold():
    report = oracle.verify_random(20, seed=3)
    for key in ("t2_embed", "t2_union", "t3_sound"):
        assert report.results[key].passed, report.results[key].failures[:3]
        assert report.results[key].checked > 0


def test_random_suite_finds_theorem_one_counterexample():
    # objects {a, C}, {a}, {}: a -> C (eta 1/2) is a terminal, so {a, -C} closes to {a, C, -C}
    ctx = boolean_context([(1, 1), (1, 0), (0, 0)])
    report = oracle.verify_theorems(ctx)
    assert not report.results["t1"].passed
    assert report.results["t2_union"].passed
