import random
from fractions import Fraction as Q
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspmt.errors import EnumerationBoundExceeded, SortError
from aspmt.frontend import parse, parse_file, prepare
from aspmt.logic import (
    BOOLEAN,
    BOT,
    NONNEG_REAL,
    And,
    BinOp,
    Const,
    Equal,
    Implies,
    Num,
    Or,
    Sym,
    conj,
    evaluate,
    int_range,
    neg,
)
from aspmt.oracle import (
    FiniteTheory,
    classical_models,
    is_stable,
    paths,
    program_theory,
    reduct_stable_models,
    stability_witness,
    stable_models,
    star,
    states,
    transitions,
)
from aspmt.translator import translate
from generators import random_negative_formula, random_theory

SMALL = Path(__file__).with_name("small.cp")

p, q, r = (Const(n, (), BOOLEAN) for n in "pqr")
P, Qa, R = (Equal(c, Sym("true")) for c in (p, q, r))
HAT_P = Equal(Const("p^", (), BOOLEAN), Sym("true"))
BOOL = ("false", "true")


def test_star_of_atom():
    assert star(P, {p.key}) == And(HAT_P, P)
    assert star(P, set()) == P


def test_star_of_falsum():
    assert star(BOT, {p.key}) == BOT


def test_star_of_double_negation_is_classical():
    f = neg(neg(P))
    # (-(-p))* is equivalent to --p: the hatted copy drops out
    g = star(f, {p.key})
    for v in BOOL:
        for h in BOOL:
            i = {p.key: v, ("p^", (), None): h}
            assert evaluate(g, i) == evaluate(f, i)


def test_fact_over_two_values():
    c = Const("c", (), int_range(1, 2))
    t = FiniteTheory(Implies(Equal(Num(1), Num(1)), Equal(c, Num(1))), {c.key}, {c.key: (Q(1), Q(2))})
    assert stable_models(t) == [{c.key: 1}]


def test_choice_rule_for_function():
    # c = v <- --(c = v) lets c take any value
    c = Const("c", (), int_range(1, 3))
    f = conj([Implies(neg(neg(Equal(c, Num(v)))), Equal(c, Num(v))) for v in (1, 2, 3)])
    assert len(stable_models(FiniteTheory(f, {c.key}, {c.key: (1, 2, 3)}))) == 3


def test_self_support_is_rejected():
    t = FiniteTheory(Implies(P, P), {p.key}, {p.key: BOOL})
    assert stable_models(t) == []
    t = FiniteTheory(Implies(P, P), {p.key}, {p.key: BOOL}, predicates={p.key})
    assert stable_models(t) == [{p.key: "false"}]


# --------------------------------------------------------------------------
# the speed example on a finite surrogate of the reals

S0 = Const("Speed", (), NONNEG_REAL, 0)
S1 = Const("Speed", (), NONNEG_REAL, 1)
DUR = Const("Duration", (), NONNEG_REAL)
ACC = Const("Accelerate", (), BOOLEAN)
SPEEDS = (Q(1), Q(11, 2))


def speed_theory():
    parts = []
    for x in SPEEDS:
        parts.append(Implies(conj([neg(neg(Equal(S1, Num(x)))), Equal(S0, Num(x))]), Equal(S1, Num(x))))
        parts.append(Implies(conj([Equal(Num(x), BinOp("+", S0, BinOp("*", Num(3), DUR))), Equal(ACC, Sym("true"))]), Equal(S1, Num(x))))
    doms = {S0.key: SPEEDS, S1.key: SPEEDS, DUR.key: (Q(3, 2),), ACC.key: BOOL}
    return FiniteTheory(conj(parts), {S1.key}, doms)


def speed(acc, s0, s1):
    return {ACC.key: acc, S0.key: s0, S1.key: s1, DUR.key: Q(3, 2)}


def test_speed_example():
    t = speed_theory()
    assert is_stable(t, speed("false", Q(1), Q(1)))
    assert is_stable(t, speed("true", Q(1), Q(11, 2)))
    bad = speed("false", Q(1), Q(11, 2))
    assert not is_stable(t, bad)
    assert stability_witness(t, bad) == {S1.key: 1}
    assert speed("false", Q(1), Q(1)) in stable_models(t)


# --------------------------------------------------------------------------
# agreement with the reduct definition on Boolean theories

ATOMS = [P, Qa, R, neg(P), neg(Qa)]
bool_formulas = st.recursive(
    st.sampled_from(ATOMS + [BOT]),
    lambda sub: st.one_of(
        st.tuples(sub, sub).map(lambda t: And(*t)),
        st.tuples(sub, sub).map(lambda t: Or(*t)),
        st.tuples(sub, sub).map(lambda t: Implies(*t)),
    ),
    max_leaves=8,
)


@settings(max_examples=300, deadline=None)
@given(bool_formulas, st.sets(st.sampled_from([p.key, q.key, r.key]), min_size=1))
def test_matches_reduct_semantics(f, intensional):
    keys = [p.key, q.key, r.key]
    t = FiniteTheory(f, intensional, {k: BOOL for k in keys}, predicates=set(keys))
    assert set(stable_models(t)) == set(reduct_stable_models(f, intensional, keys))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_negative_conjunct_filters_models(seed):
    rng = random.Random(seed)
    t = random_theory(rng)
    g = random_negative_formula(rng, t)
    both = stable_models(FiniteTheory(conj([t.formula(), g]), t.intensional, t.domains))
    alone = stable_models(FiniteTheory(t.formula(), t.intensional, t.domains))
    assert set(both) == {i for i in alone if evaluate(g, i)}


def test_missing_domain():
    with pytest.raises(SortError):
        FiniteTheory(P, {p.key}, {})


def test_enumeration_bound():
    c = [Const(f"c{i}", (), int_range(0, 9)) for i in range(4)]
    f = conj([Equal(x, x) for x in c])
    with pytest.raises(EnumerationBoundExceeded):
        classical_models(f, {x.key: tuple(range(10)) for x in c}, bound=1000)
    with pytest.raises(EnumerationBoundExceeded):
        stable_models(FiniteTheory(f, set(), {x.key: tuple(range(10)) for x in c}), bound=1000)


def test_real_sorts_rejected(car):
    with pytest.raises(SortError):
        program_theory(translate(car, 1))


# --------------------------------------------------------------------------
# action descriptions


@pytest.fixture(scope="module")
def small():
    return prepare(parse_file(SMALL))


def test_small_states(small):
    # Q holds exactly when P and N = 2
    ss = states(small)
    assert len(ss) == 6
    for s in ss:
        assert (s[("Q", (), 0)] == "true") == (s[("P", (), 0)] == "true" and s[("N", (), 0)] == 2)


def test_small_transitions(small):
    ts = transitions(small)
    assert len(ts) == 6 * 4
    for t in ts:
        n0, n1 = t[("N", (), 0)], t[("N", (), 1)]
        assert n1 == (min(n0 + 1, 2) if t[("Inc", (), 0)] == "true" else n0)
        flipped = t[("P", (), 0)] != t[("P", (), 1)]
        assert flipped == (t[("Flip", (), 0)] == "true")


@pytest.mark.parametrize("m", [0, 1, 2])
def test_paths_are_stable_models(small, m):
    ps = paths(small, m)
    assert len(ps) == 6 * 4**m
    assert set(ps) == set(stable_models(program_theory(translate(small, m))))


def test_sd_default_without_support():
    d = prepare(parse(":- constants\n F :: sdFluent(boolean); A :: action(boolean).\ndefault ~F.\nexogenous A.\n"))
    assert states(d) == [{("F", (), 0): "false"}]
