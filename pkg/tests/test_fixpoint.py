import random

import numpy as np
import pytest

from pfca import oracle
from pfca.config import RunConfig
from pfca.context import LiteralSet, object_intent
from pfca.fixpoint import (
    FixpointError,
    MonotonicityError,
    UpsilonEngine,
    classify,
    closure,
    cluster,
    int_criterion,
    predict_step,
    prediction_state,
    upsilon_fixpoint,
    upsilon_step,
)
from pfca.miner import mine_mscr
from pfca.rules import CausalRule, RuleSet

from conftest import boolean_context

# atoms a, b, c -> literals +a=0 -a=1 +b=2 -b=3 +c=4 -c=5
A, NA, B, NB, C, NC = range(6)
G1 = -np.log(1e-4)  # gamma of an eta = 1 rule


def rs(*triples):
    return RuleSet([CausalRule(p, c, eta=e) for p, c, e in triples])


AB = rs(((A,), B, 1.0))
AB_BC = rs(((A,), B, 1.0), ((B,), C, 1.0))


def test_predict_step():
    assert predict_step(AB, {A}) == {A, B}
    assert predict_step(AB, {C}) == {C}
    assert predict_step(AB_BC, {A}) == {A, B}


def test_closure():
    assert closure(AB_BC, {A}) == {A, B, C}
    assert closure(RuleSet(), {A, NC}) == {A, NC}
    assert closure(rs(((), C, 1.0)), set()) == {C}


def test_closure_matches_naive_iteration():
    rng = random.Random(3)
    for _ in range(20):
        ctx = oracle.random_context(rng, 8, 4)
        rules = mine_mscr(ctx, None, RunConfig(mode="exact", max_premise_len=3))
        for g in range(ctx.n_objects):
            L = object_intent(ctx, g)
            assert closure(rules, L) == oracle.naive_closure(list(rules), L)


def test_ctx_a_closure_of_g1(ctx_a):
    rules = mine_mscr(ctx_a, None, RunConfig(mode="exact", max_premise_len=3))
    L = object_intent(ctx_a, 0)
    T = closure(rules, L)
    assert T >= L and T.consistent


def test_int_criterion():
    value, sat, fal = int_criterion(AB, {A, B})
    assert value == pytest.approx(9.2103, abs=1e-4) and sat == (0,) and fal == ()
    value, sat, fal = int_criterion(AB, {A, NB})
    assert value == pytest.approx(-9.2103, abs=1e-4) and fal == (0,) and sat == ()
    assert int_criterion(AB, set())[0] == 0
    st = prediction_state(AB, {A, B})
    assert st.int_value == pytest.approx(G1)


def test_step_add():
    L, (action, lit) = upsilon_step(AB, {A})
    assert (action, lit) == ("added", B) and L == {A, B}
    eng = UpsilonEngine(AB)
    _, dplus, dminus, _, _ = eng.scores(LiteralSet({A}))
    assert dplus[B] == pytest.approx(G1) and dminus[A] == 0


def test_step_fixpoint_when_all_edits_lose():
    L, (action, _) = upsilon_step(AB, {A, B})
    assert action == "fixpoint" and L == {A, B}
    _, _, dminus, _, _ = UpsilonEngine(AB).scores(LiteralSet({A, B}))
    assert dminus[A] < 0 and dminus[B] < 0


def test_step_removal_increases_int():
    rules = rs(((A,), B, 1.0), ((C,), NB, 1.0))
    L0 = LiteralSet({A, C, B})
    L1, (action, lit) = upsilon_step(rules, L0)
    assert action == "removed"
    assert int_criterion(rules, L1)[0] > int_criterion(rules, L0)[0]


def test_deltas_match_recomputation():
    rng = random.Random(9)
    for _ in range(15):
        ctx = oracle.random_context(rng, 8, 5)
        rules = mine_mscr(ctx, None, RunConfig(mode="exact", max_premise_len=3))
        eng = UpsilonEngine(rules, 1e-4, ctx.n_literals)
        for L in oracle.random_compatible_seeds(ctx, rng, 5):
            base, dplus, dminus, _, _ = eng.scores(L)
            assert base == pytest.approx(int_criterion(rules, L)[0], abs=1e-9)
            for g in range(ctx.n_literals):
                if g in L:
                    want = int_criterion(rules, L - {g})[0] - base
                    assert dminus[g] == pytest.approx(want, abs=1e-9)
                elif (g ^ 1) not in L:
                    want = int_criterion(rules, L | {g})[0] - base
                    assert dplus[g] == pytest.approx(want, abs=1e-9)


def test_fixpoint_two_additions():
    eng = UpsilonEngine(AB_BC)
    fp = eng.fixpoint({A})
    assert fp.intent == {A, B, C} and eng.steps == 2
    assert fp.int_value == pytest.approx(2 * G1)
    assert upsilon_fixpoint(RuleSet(), {A, NB}).intent == {A, NB}


def test_fixpoint_step_limit():
    with pytest.raises(FixpointError):
        UpsilonEngine(AB_BC).fixpoint({A}, max_steps=1)


def test_monotonicity_guard(monkeypatch):
    eng = UpsilonEngine(AB)
    monkeypatch.setattr(eng, "step", lambda L: (LiteralSet(L), ("added", B)))
    with pytest.raises(MonotonicityError):
        eng.fixpoint({A, B})


def test_upsilon_equals_closure_when_closure_is_consistent():
    rng = random.Random(21)
    checked = 0
    for _ in range(25):
        ctx = oracle.random_context(rng)
        rules = mine_mscr(ctx, None, RunConfig(mode="exact", max_premise_len=3))
        eng = UpsilonEngine(rules, 1e-4, ctx.n_literals)
        for L in oracle.random_compatible_seeds(ctx, rng, 5):
            T = closure(rules, L)
            if T.consistent and ctx.extent_mask(T).any():
                checked += 1
                assert eng.fixpoint(L).intent == T
    assert checked > 20


def test_cluster_one_class():
    ctx = boolean_context([(1, 0, 1)] * 5)
    rules = mine_mscr(ctx, None, RunConfig(mode="exact"))
    (c,) = cluster(ctx, rules)
    assert c.extent == frozenset(range(5)) and c.consistent


def test_cluster_without_rules_is_degenerate(ctx_a):
    cs = cluster(ctx_a, RuleSet())
    assert len(cs) == 4
    assert {c.intent for c in cs} == {object_intent(ctx_a, g) for g in range(4)}


def test_cluster_operators_agree_on_ctx_a(ctx_a):
    rules = mine_mscr(ctx_a, None, RunConfig(mode="exact", max_premise_len=3))
    ups = cluster(ctx_a, rules)
    clo = cluster(ctx_a, rules, operator="closure")
    assert [(c.intent, c.extent) for c in ups] == [(c.intent, c.extent) for c in clo]
    with pytest.raises(ValueError):
        cluster(ctx_a, rules, operator="nope")


def test_classify(ctx_a):
    rules = mine_mscr(ctx_a, None, RunConfig(mode="exact", max_premise_len=3))
    cs = cluster(ctx_a, rules)
    for k, c in enumerate(cs):
        for g in c.seed_objects:
            assert classify(ctx_a, rules, cs, object_intent(ctx_a, g)) == k
    assert classify(ctx_a, rules, [], {A}) is None
